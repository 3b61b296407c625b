"""Spin registers and the product-basis contract shared by every module.

Conventions, fixed once and relied on everywhere:

* the product basis is lexicographic with site 1 slowest (leftmost kron
  factor), site N fastest;
* each site's local basis is ordered m = s, s-1, ..., -s, so index 0 is
  the maximally polarized "up" state;
* spin quantum numbers are stored as ``2s`` (``twice_s``) so half-integer
  values stay exact;
* site labels are 1-based (physics labels), raw array axes are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Spin",
    "SpinRegister",
    "kron_all",
    "embed",
    "product_state",
    "basis_index",
    "partial_trace",
    "density_matrix",
    "maximally_mixed",
]

# Largest single-site spin handled by this package (dimension guardrail).
MAX_TWICE_S = 6


@dataclass(frozen=True)
class Spin:
    """A single-site spin quantum number, stored as 2s."""

    twice_s: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_s, (int, np.integer)):
            raise ValueError(f"twice_s must be an integer, got {self.twice_s!r}")
        if self.twice_s < 1:
            raise ValueError("spin-0 particles do not occur in this model (twice_s >= 1)")
        if self.twice_s > MAX_TWICE_S:
            raise ValueError(f"spins larger than s={MAX_TWICE_S / 2} are not supported")

    @classmethod
    def of(cls, s: "Spin | float | int") -> "Spin":
        """Coerce a numeric spin value (0.5, 1, 1.5, ...) to a Spin."""
        if isinstance(s, Spin):
            return s
        twice = round(2 * float(s))
        if abs(2 * float(s) - twice) > 1e-12:
            raise ValueError(f"spin must be integer or half-integer, got {s}")
        return cls(int(twice))

    @property
    def s(self) -> float:
        return self.twice_s / 2

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    def m_values(self) -> np.ndarray:
        """Azimuthal quantum numbers in basis order, m = s, s-1, ..., -s."""
        return np.arange(self.twice_s, -self.twice_s - 1, -2) / 2


@dataclass(frozen=True)
class SpinRegister:
    """Ordered collection of static spins, defining the composite space."""

    spins: tuple[Spin, ...]

    def __post_init__(self) -> None:
        if not self.spins:
            raise ValueError("register must contain at least one spin")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "SpinRegister":
        return cls(tuple(Spin.of(v) for v in values))

    def __len__(self) -> int:
        return len(self.spins)

    def __iter__(self) -> Iterator[Spin]:
        return iter(self.spins)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(sp.dim for sp in self.spins)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def spin_at(self, site: int) -> Spin:
        """Spin at 1-based site label."""
        self._check_site(site)
        return self.spins[site - 1]

    def _check_site(self, site: int) -> None:
        if not 1 <= site <= len(self.spins):
            raise ValueError(f"site {site} outside register 1..{len(self.spins)}")


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def embed(register: SpinRegister, op: np.ndarray, site: int) -> np.ndarray:
    """Embed a single-site operator at a 1-based site, identity elsewhere."""
    register._check_site(site)
    ops = [np.eye(d, dtype=complex) for d in register.dims]
    if op.shape != ops[site - 1].shape:
        raise ValueError(f"operator shape {op.shape} does not match site {site}")
    ops[site - 1] = np.asarray(op, dtype=complex)
    return kron_all(ops)


def basis_index(register: SpinRegister, m_values: Sequence[float]) -> int:
    """Flat index of the product ket with the given per-site m values."""
    if len(m_values) != len(register):
        raise ValueError("need one m value per site")
    idx = 0
    for sp, m in zip(register.spins, m_values):
        tm = round(2 * float(m))
        if abs(2 * float(m) - tm) > 1e-12 or abs(tm) > sp.twice_s or (sp.twice_s - tm) % 2:
            raise ValueError(f"m={m} invalid for spin s={sp.s}")
        idx = idx * sp.dim + (sp.twice_s - tm) // 2
    return idx


def product_state(register: SpinRegister, m_values: Sequence[float]) -> np.ndarray:
    """Unit product ket |m_1, ..., m_N> in the register's basis."""
    vec = np.zeros(register.dim, dtype=complex)
    vec[basis_index(register, m_values)] = 1.0
    return vec


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out all subsystems except those in ``keep`` (0-based axes)."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = sorted(keep)
    rho = np.asarray(rho).reshape(dims + dims)
    # contract bra/ket axes of every traced subsystem
    lhs = list(range(n)) + [n + i if i in keep else i for i in range(n)]
    rhs = [i for i in keep] + [n + i for i in keep]
    out = np.einsum(rho, lhs, rhs)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return out.reshape(d_keep, d_keep)


def density_matrix(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim
