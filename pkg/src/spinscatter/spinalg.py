"""Angular-momentum kinematics: spin matrices, Clebsch-Gordan coefficients,
coupled bases over arbitrary coupling trees, and Dicke states.

Phase conventions are Condon-Shortley throughout: ladder matrix elements are
real non-negative, and for each coupled multiplet the highest-weight state has
a positive amplitude on the product ket with maximal m of the first factor.
Clebsch-Gordan coefficients are obtained by exact diagonalization of the
two-factor total spin within each magnetization sector, with signs fixed by
ladder descent; all coefficients come out real.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .registers import Spin, SpinRegister, embed, kron_all

__all__ = [
    "SpinOperators",
    "make_spin_operators",
    "clebsch_gordan",
    "CouplingScheme",
    "CoupledBasisState",
    "couple",
    "dicke_state",
    "total_spin_operators",
    "casimir",
]


@dataclass(frozen=True)
class SpinOperators:
    """Cartesian and ladder spin matrices for one (possibly collective) spin."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def dim(self) -> int:
        return self.sx.shape[0]

    def casimir(self) -> np.ndarray:
        """sx^2 + sy^2 + sz^2."""
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz


def make_spin_operators(s: Spin | float) -> SpinOperators:
    """Spin matrices for quantum number s, local basis m = s, s-1, ..., -s."""
    sp = Spin.of(s)
    m = sp.m_values()
    sz = np.diag(m).astype(complex)
    plus = np.zeros((sp.dim, sp.dim), dtype=complex)
    for i in range(sp.dim - 1):
        mm = m[i + 1]
        plus[i, i + 1] = np.sqrt(sp.s * (sp.s + 1) - mm * (mm + 1))
    minus = plus.conj().T
    sx = (plus + minus) / 2
    sy = (plus - minus) / 2j
    return SpinOperators(sx=sx, sy=sy, sz=sz, plus=plus, minus=minus)


def _half(value: float, name: str) -> int:
    """Validate a (half-)integer and return 2*value as an exact int."""
    twice = round(2 * float(value))
    if abs(2 * float(value) - twice) > 1e-9:
        raise ValueError(f"{name}={value} is not integer or half-integer")
    return int(twice)


@functools.lru_cache(maxsize=None)
def _pair_table(tj1: int, tj2: int) -> dict[tuple[int, int], np.ndarray]:
    """Coupled states of j1 (x) j2 as real vectors over the product basis.

    Keys are (2j, 2m); vectors are indexed i1*d2 + i2 with i = j - m
    (m descending), matching the global basis contract.
    """
    j1, j2 = tj1 / 2, tj2 / 2
    d1, d2 = tj1 + 1, tj2 + 1
    ops1 = make_spin_operators(j1)
    ops2 = make_spin_operators(j2)
    eye1, eye2 = np.eye(d1), np.eye(d2)
    jz = np.kron(ops1.sz, eye2) + np.kron(eye1, ops2.sz)
    jminus = np.kron(ops1.minus, eye2) + np.kron(eye1, ops2.minus)
    jplus = jminus.conj().T
    j_sq = (jz @ jz + (jplus @ jminus + jminus @ jplus) / 2).real

    m_of_basis = np.diag(jz).real
    table: dict[tuple[int, int], np.ndarray] = {}
    for tj in range(tj1 + tj2, abs(tj1 - tj2) - 1, -2):
        j = tj / 2
        # highest-weight state from the m = j magnetization sector
        idx = np.where(np.abs(m_of_basis - j) < 1e-9)[0]
        sub = j_sq[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(sub)
        col = int(np.argmin(np.abs(w - j * (j + 1))))
        top = np.zeros(d1 * d2)
        top[idx] = v[:, col]
        # Condon-Shortley: amplitude on the maximal-m1 component is positive
        lead = int(np.flatnonzero(np.abs(top) > 1e-12).min())
        if top[lead] < 0:
            top = -top
        table[(tj, tj)] = top
        # descend the multiplet by the lowering operator
        vec = top
        for tm in range(tj - 2, -tj - 1, -2):
            m_up = (tm + 2) / 2
            vec = (jminus.real @ vec) / np.sqrt(j * (j + 1) - m_up * (m_up - 1))
            table[(tj, tm)] = vec
    return table


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, j: float, m: float) -> float:
    """<j1 m1; j2 m2 | j m> in the Condon-Shortley convention.

    Selection-rule failures (m1+m2 != m, triangle violation) return 0;
    arguments that are not valid (half-)integer pairs raise ValueError.
    """
    tj1, tm1 = _half(j1, "j1"), _half(m1, "m1")
    tj2, tm2 = _half(j2, "j2"), _half(m2, "m2")
    tj, tm = _half(j, "j"), _half(m, "m")
    for tjv, tmv, name in ((tj1, tm1, "1"), (tj2, tm2, "2"), (tj, tm, "")):
        if tjv < 0:
            raise ValueError(f"j{name} must be non-negative")
        if abs(tmv) > tjv or (tjv - tmv) % 2:
            raise ValueError(f"m{name}={tmv / 2} invalid for j{name}={tjv / 2}")
    if tm1 + tm2 != tm:
        return 0.0
    if tj > tj1 + tj2 or tj < abs(tj1 - tj2) or (tj1 + tj2 - tj) % 2:
        return 0.0
    vec = _pair_table(tj1, tj2)[(tj, tm)]
    i1 = (tj1 - tm1) // 2
    i2 = (tj2 - tm2) // 2
    return float(vec[i1 * (tj2 + 1) + i2])


Tree = tuple  # nested tuples of 1-based site labels, e.g. ((1, 2), (3, 4))


@dataclass(frozen=True)
class CouplingScheme:
    """Binary tree declaring the order of angular-momentum addition.

    Leaves must be the site labels 1..N in left-to-right order; every internal
    node is identified by the tuple of leaves it covers, e.g. (1, 2) or
    (1, 2, 3, 4).
    """

    tree: Tree

    def __post_init__(self) -> None:
        leaves = self.leaves()
        if leaves != tuple(range(1, len(leaves) + 1)):
            raise ValueError(f"scheme leaves must read 1..N in order, got {leaves}")

    @classmethod
    def pairwise(cls, n: int) -> "CouplingScheme":
        """Left-comb scheme (...((1,2),3)...,n) over n sites."""
        if n < 1:
            raise ValueError("need at least one site")
        tree: object = 1
        for site in range(2, n + 1):
            tree = (tree, site)
        return cls(tree if n > 1 else 1)

    def leaves(self) -> tuple[int, ...]:
        return _leaves(self.tree)

    def nodes(self) -> tuple[tuple[int, ...], ...]:
        """All internal nodes (as leaf-label tuples), children before parents."""
        out: list[tuple[int, ...]] = []
        _collect_nodes(self.tree, out)
        return tuple(out)


def _leaves(tree: object) -> tuple[int, ...]:
    if isinstance(tree, (int, np.integer)):
        return (int(tree),)
    if isinstance(tree, tuple) and len(tree) == 2:
        return _leaves(tree[0]) + _leaves(tree[1])
    raise ValueError(f"malformed coupling tree node: {tree!r}")


def _collect_nodes(tree: object, out: list) -> tuple[int, ...]:
    if isinstance(tree, (int, np.integer)):
        return (int(tree),)
    left = _collect_nodes(tree[0], out)
    right = _collect_nodes(tree[1], out)
    node = left + right
    out.append(node)
    return node


@dataclass(frozen=True)
class CoupledBasisState:
    """One coupled-basis vector with its full set of intermediate labels.

    ``labels`` maps each internal node (tuple of sites) to its spin quantum
    number; the root entry equals ``total``.
    """

    scheme: CouplingScheme
    labels: Mapping[tuple[int, ...], float]
    total: float
    azimuthal: float
    vector: np.ndarray


def couple(
    scheme: CouplingScheme,
    register: SpinRegister,
    labels: Mapping[tuple[int, ...], float] | None = None,
) -> list[CoupledBasisState]:
    """Complete orthonormal coupled basis of the register's product space.

    Expansion coefficients are products of Clebsch-Gordan coefficients along
    the tree. ``labels`` optionally restricts intermediate quantum numbers,
    e.g. {(1, 2, 3): 0.5}; an impossible or unknown label raises ValueError.
    """
    if scheme.leaves() != tuple(range(1, len(register) + 1)):
        raise ValueError(
            f"scheme covers {len(scheme.leaves())} sites but register has {len(register)}"
        )
    wanted = {}
    if labels:
        known = set(scheme.nodes())
        for node, value in labels.items():
            node = tuple(node)
            if node not in known:
                raise ValueError(f"label {node} does not name a node of the scheme")
            wanted[node] = _half(value, f"label{node}")

    multiplets = _couple_tree(scheme.tree, register, wanted)
    if labels and not multiplets:
        raise ValueError(f"no coupled states exist with labels {dict(labels)}")
    states: list[CoupledBasisState] = []
    for tj, node_labels, block in multiplets:
        for col, tm in enumerate(range(tj, -tj - 1, -2)):
            states.append(
                CoupledBasisState(
                    scheme=scheme,
                    labels={k: tv / 2 for k, tv in node_labels.items()},
                    total=tj / 2,
                    azimuthal=tm / 2,
                    vector=block[:, col].astype(complex),
                )
            )
    return states


def _couple_tree(tree, register: SpinRegister, wanted: dict):
    """Recursively build multiplets (2j, labels, column block m = j..-j)."""
    if isinstance(tree, (int, np.integer)):
        sp = register.spin_at(int(tree))
        return [(sp.twice_s, {}, np.eye(sp.dim))]
    left = _couple_tree(tree[0], register, wanted)
    right = _couple_tree(tree[1], register, wanted)
    node = _leaves(tree)
    target = wanted.get(node)
    out = []
    for tj1, lab1, block1 in left:
        for tj2, lab2, block2 in right:
            for tj in range(tj1 + tj2, abs(tj1 - tj2) - 1, -2):
                if target is not None and tj != target:
                    continue
                table = _pair_table(tj1, tj2)
                d1 = block1.shape[0]
                d2 = block2.shape[0]
                cols = np.zeros((d1 * d2, tj + 1))
                for col, tm in enumerate(range(tj, -tj - 1, -2)):
                    coeffs = table[(tj, tm)].reshape(tj1 + 1, tj2 + 1)
                    # |j m> = sum_{m1 m2} c(m1, m2) |j1 m1>|j2 m2>
                    cols[:, col] = np.einsum(
                        "ab,ia,jb->ij", coeffs, block1, block2
                    ).reshape(-1)
                labels = {**lab1, **lab2, node: tj}
                out.append((tj, labels, cols))
    if target is not None and not out and left and right:
        achievable = {
            tj
            for tj1, _, _ in left
            for tj2, _, _ in right
            for tj in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2)
        }
        if target not in achievable:
            raise ValueError(
                f"label {node}: s={target / 2} violates the triangle rules of its children"
            )
    return out


def dicke_state(n: int, k: int) -> np.ndarray:
    """Equal-amplitude symmetric state of n qubits with exactly k up spins."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0 <= k <= n:
        raise ValueError(f"excitation count k={k} outside 0..{n}")
    vec = np.zeros(2**n, dtype=complex)
    amp = 1.0 / np.sqrt(comb(n, k))
    # local index 0 is "up": a ket's flat index has bit 1 at every down site
    for down_bits in _indices_with_down_count(n, n - k):
        vec[down_bits] = amp
    return vec


def _indices_with_down_count(n: int, n_down: int):
    import itertools

    for downs in itertools.combinations(range(n), n_down):
        idx = 0
        for site in downs:
            idx |= 1 << (n - 1 - site)
        yield idx


def total_spin_operators(register: SpinRegister, sites: Sequence[int] | None = None) -> SpinOperators:
    """Collective spin operators, summed over the given 1-based sites."""
    chosen = tuple(sites) if sites is not None else tuple(range(1, len(register) + 1))
    if not chosen:
        raise ValueError("need at least one site")
    dim = register.dim
    total = {name: np.zeros((dim, dim), dtype=complex) for name in ("sx", "sy", "sz", "plus", "minus")}
    for site in chosen:
        ops = make_spin_operators(register.spin_at(site))
        for name in total:
            total[name] += embed(register, getattr(ops, name), site)
    return SpinOperators(**total)


def casimir(register: SpinRegister, sites: Sequence[int] | None = None) -> np.ndarray:
    """Squared collective spin of a subset of sites (the partial Casimir)."""
    return total_spin_operators(register, sites).casimir()
