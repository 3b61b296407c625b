"""Transmission of a mobile spin-1/2 across contact-interaction spin centers.

Two solvers compute the transmitted-amplitude operator on the joint
(mobile (x) centers) spin space:

* ``transfer_matrix_transmission`` solves the stationary scattering problem
  exactly for arbitrary center positions, composing operator-valued transfer
  matrices barrier by barrier;
* ``effective_transmission`` assumes the resonance conditions
  k (x_{j+1} - x_j) = q_j pi and diagonalizes the single collective coupling,
  giving per-channel amplitudes t(lambda) = 1 / (1 + i m J lambda / k).

Units: hbar = 1 and (by default) particle mass m = 1, kinetic term
-(1/2) d^2/dx^2, so each barrier imposes the derivative jump
psi'(x+) - psi'(x-) = 2 m J G psi(x) with G the local coupling operator.
The mobile spin operators default to the spin-1/2 matrices (Pauli / 2);
``sigma_convention="pauli"`` uses bare Pauli matrices instead, which is
equivalent to doubling J.

Joint-space ordering: mobile factor slowest, centers following the register
contract.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .registers import SpinRegister, embed, kron_all
from .spinalg import casimir, make_spin_operators

__all__ = [
    "ScatteringConfig",
    "TransmissionOperator",
    "Channel",
    "ChannelDecomposition",
    "NumericalInstabilityError",
    "ResonanceInconsistencyError",
    "coupling_operator",
    "effective_transmission",
    "transfer_matrix_transmission",
    "rc_wavenumbers",
    "rc_positions",
    "is_resonant",
    "channel_report",
    "channel_sweep_rows",
    "write_channel_sweep_csv",
]

COUPLING_MODELS = ("heisenberg", "xy")
SIGMA_CONVENTIONS = ("spin", "pauli")


class NumericalInstabilityError(RuntimeError):
    """Transfer-matrix composition became numerically singular."""


class ResonanceInconsistencyError(ValueError):
    """No single wavenumber satisfies all resonance conditions."""


@dataclass(frozen=True)
class ScatteringConfig:
    """Geometry and coupling of one scattering problem.

    ``positions`` are the barrier coordinates (strictly increasing, same
    length as the register); ``j`` is the contact interaction strength and
    ``k`` the mobile wavenumber.
    """

    register: SpinRegister
    positions: tuple[float, ...]
    j: float
    k: float
    model: str = "heisenberg"
    mass: float = 1.0
    sigma_convention: str = "spin"

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", tuple(float(x) for x in self.positions))
        if len(self.positions) != len(self.register):
            raise ValueError("need one position per center")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")
        if isinstance(self.j, complex):
            if self.j.imag != 0:
                raise ValueError("coupling strength J must be real")
            object.__setattr__(self, "j", self.j.real)
        object.__setattr__(self, "j", float(self.j))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "mass", float(self.mass))
        if self.k <= 0:
            raise ValueError("wavenumber k must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.model not in COUPLING_MODELS:
            raise ValueError(f"model must be one of {COUPLING_MODELS}")
        if self.sigma_convention not in SIGMA_CONVENTIONS:
            raise ValueError(f"sigma_convention must be one of {SIGMA_CONVENTIONS}")

    @property
    def joint_dim(self) -> int:
        return 2 * self.register.dim


@dataclass(frozen=True)
class TransmissionOperator:
    """Transmitted-amplitude operator at fixed wavenumber, with its
    reflection partner for flux bookkeeping."""

    matrix: np.ndarray
    k: float
    reflection: np.ndarray

    def flux_defect(self) -> float:
        """Operator norm of T^dag T + R^dag R - I (zero when flux conserves)."""
        t, r = self.matrix, self.reflection
        eye = np.eye(t.shape[0])
        return float(np.linalg.norm(t.conj().T @ t + r.conj().T @ r - eye, 2))


def _mobile_ops(sigma_convention: str):
    ops = make_spin_operators(0.5)
    scale = 2.0 if sigma_convention == "pauli" else 1.0
    return tuple(scale * getattr(ops, name) for name in ("sx", "sy", "sz"))


def coupling_operator(
    register: SpinRegister,
    site: int | None = None,
    model: str = "heisenberg",
    sigma_convention: str = "spin",
) -> np.ndarray:
    """Joint-space spin-spin coupling at one center (or summed over all).

    Heisenberg couples all three components, the xy model only the
    transverse ones.
    """
    if model not in COUPLING_MODELS:
        raise ValueError(f"model must be one of {COUPLING_MODELS}")
    sx, sy, sz = _mobile_ops(sigma_convention)
    sites = range(1, len(register) + 1) if site is None else (site,)
    components = ("sx", "sy") if model == "xy" else ("sx", "sy", "sz")
    mobile = {"sx": sx, "sy": sy, "sz": sz}
    out = np.zeros((2 * register.dim, 2 * register.dim), dtype=complex)
    for st in sites:
        ops = make_spin_operators(register.spin_at(st))
        for name in components:
            out += np.kron(mobile[name], embed(register, getattr(ops, name), st))
    return out


def effective_transmission(config: ScatteringConfig) -> TransmissionOperator:
    """Single-barrier form valid under resonance conditions: diagonalize the
    collective coupling and apply t(lambda) = 1/(1 + i m J lambda / k)."""
    g = coupling_operator(config.register, None, config.model, config.sigma_convention)
    w, v = np.linalg.eigh(g)
    t = 1.0 / (1.0 + 1j * config.mass * config.j * w / config.k)
    matrix = (v * t) @ v.conj().T
    reflection = (v * (t - 1.0)) @ v.conj().T
    return TransmissionOperator(matrix=matrix, k=config.k, reflection=reflection)


def transfer_matrix_transmission(config: ScatteringConfig) -> TransmissionOperator:
    """Exact multi-barrier solver for arbitrary positions.

    At each barrier the wavefunction is continuous and its derivative jumps by
    2 m J G_i psi; plane-wave amplitude pairs are propagated through all
    barriers and the transmitted block is extracted from the composed map.
    """
    dim = config.joint_dim
    eye = np.eye(dim, dtype=complex)
    transfer = np.eye(2 * dim, dtype=complex)
    c = config.mass * config.j / (1j * config.k)
    for site, x in enumerate(config.positions, start=1):
        g = coupling_operator(config.register, site, config.model, config.sigma_convention)
        cg = c * g
        block = np.zeros((2 * dim, 2 * dim), dtype=complex)
        block[:dim, :dim] = eye + cg
        block[:dim, dim:] = cg * np.exp(-2j * config.k * x)
        block[dim:, :dim] = -cg * np.exp(2j * config.k * x)
        block[dim:, dim:] = eye - cg
        transfer = block @ transfer
    m22 = transfer[dim:, dim:]
    if np.linalg.cond(m22) > 1e12:
        raise NumericalInstabilityError(
            f"transfer composition ill-conditioned at k={config.k}"
        )
    reflection = -np.linalg.solve(m22, transfer[dim:, :dim])
    matrix = transfer[:dim, :dim] + transfer[:dim, dim:] @ reflection
    return TransmissionOperator(matrix=matrix, k=config.k, reflection=reflection)


def rc_wavenumbers(positions: Sequence[float], q_list: Sequence[int]) -> float:
    """The common wavenumber k with k (x_{j+1} - x_j) = q_j pi for every gap.

    Raises :class:`ResonanceInconsistencyError` when the gaps demand
    conflicting wavenumbers (relative tolerance 1e-12).
    """
    positions = [float(x) for x in positions]
    if len(q_list) != len(positions) - 1:
        raise ValueError("need one integer q per gap")
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise ValueError("positions must be strictly increasing")
    if any(int(q) != q or q < 1 for q in q_list):
        raise ValueError("resonance integers q must be positive")
    candidates = [
        q * np.pi / (b - a) for q, a, b in zip(q_list, positions, positions[1:])
    ]
    k = candidates[0]
    for other in candidates[1:]:
        if abs(other - k) > 1e-12 * max(abs(k), abs(other)):
            raise ResonanceInconsistencyError(
                f"gaps demand incompatible wavenumbers {k} vs {other}"
            )
    return float(k)


def rc_positions(k: float, q_list: Sequence[int], x0: float = 0.0) -> tuple[float, ...]:
    """Barrier positions satisfying the resonance conditions at wavenumber k."""
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    out = [float(x0)]
    for q in q_list:
        if int(q) != q or q < 1:
            raise ValueError("resonance integers q must be positive")
        out.append(out[-1] + q * np.pi / k)
    return tuple(out)


def is_resonant(config: ScatteringConfig, tol: float = 1e-9) -> bool:
    """Whether every gap satisfies k * gap = (integer) * pi."""
    for a, b in zip(config.positions, config.positions[1:]):
        phase = config.k * (b - a) / np.pi
        if abs(phase - round(phase)) > tol:
            return False
    return True


@dataclass(frozen=True)
class Channel:
    """One eigenvalue of the collective coupling with its scattering data."""

    eigenvalue: float
    degeneracy: int
    projector: np.ndarray
    amplitude: complex


@dataclass(frozen=True)
class ChannelDecomposition:
    channels: tuple[Channel, ...]
    model: str
    completeness_defect: float = field(default=0.0)
    conservation_defect: float = field(default=0.0)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([ch.eigenvalue for ch in self.channels])


def channel_report(config: ScatteringConfig, tol: float = 1e-8) -> ChannelDecomposition:
    """Spectral decomposition of the effective barrier.

    Groups coupling eigenvalues, attaches t(lambda) to each, and verifies
    that the projectors resolve the identity; for the Heisenberg model it
    also verifies that every projector commutes with the collective Casimir
    of the centers (the conserved total spin).
    """
    g = coupling_operator(config.register, None, config.model, config.sigma_convention)
    w, v = np.linalg.eigh(g)
    channels: list[Channel] = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[start] > tol:
            lam = float(np.mean(w[start:i]))
            block = v[:, start:i]
            proj = block @ block.conj().T
            amp = 1.0 / (1.0 + 1j * config.mass * config.j * lam / config.k)
            channels.append(
                Channel(eigenvalue=lam, degeneracy=i - start, projector=proj, amplitude=amp)
            )
            start = i
    total = sum(ch.projector for ch in channels)
    completeness = float(np.linalg.norm(total - np.eye(config.joint_dim), 2))
    conservation = 0.0
    if config.model == "heisenberg":
        s2 = np.kron(np.eye(2), casimir(config.register))
        conservation = max(
            float(np.linalg.norm(ch.projector @ s2 - s2 @ ch.projector, 2))
            for ch in channels
        )
    return ChannelDecomposition(
        channels=tuple(channels),
        model=config.model,
        completeness_defect=completeness,
        conservation_defect=conservation,
    )


def channel_sweep_rows(
    register: SpinRegister,
    j_values: Iterable[float],
    k_values: Iterable[float],
    model: str = "heisenberg",
    sigma_convention: str = "spin",
    mass: float = 1.0,
) -> list[dict]:
    """Per-channel records over a (k, J) grid, ready for CSV export."""
    rows = []
    for k in k_values:
        for j in j_values:
            config = ScatteringConfig(
                register=register,
                positions=rc_positions(k, [1] * (len(register) - 1)),
                j=j,
                k=k,
                model=model,
                mass=mass,
                sigma_convention=sigma_convention,
            )
            for ch in channel_report(config).channels:
                rows.append(
                    {
                        "k": k,
                        "J": j,
                        "model": model,
                        "lambda": ch.eigenvalue,
                        "t_abs2": abs(ch.amplitude) ** 2,
                        "t_phase": float(np.angle(ch.amplitude)),
                    }
                )
    return rows


def write_channel_sweep_csv(path: str | Path, rows: Iterable[dict], header_comments: Sequence[str] = ()) -> None:
    """CSV with columns (k, J, model, lambda, t_abs2, t_phase)."""
    fields = ["k", "J", "model", "lambda", "t_abs2", "t_phase"]
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in fields})


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)
