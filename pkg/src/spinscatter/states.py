"""Closed-form target states and their brute-force sector-projection oracle.

Every constructor returns a :class:`TargetState` carrying the sector labels
(partial-Casimir quantum numbers) that single it out; ``verify_against_oracle``
rebuilds the state independently by intersecting the null space of the total
spin squared with those Casimir eigenspaces and reports the fidelity, so
printed amplitudes and uniqueness claims are checked rather than assumed.

Note on the four-qubit triplet basis: the |M = +-1> members of the
s12 = s34 = S = 1 multiplet are the antisymmetric combinations
(|1,m1>|1,m2> - |1,m2>|1,m1>)/sqrt(2), not the symmetric single-excitation
Dicke states (those carry S = 2). The two families map onto each other under
the local unitary Z1 Z2, so the entanglement classes (W) coincide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .registers import Spin, SpinRegister, basis_index
from .spinalg import casimir, clebsch_gordan, dicke_state

__all__ = [
    "TargetState",
    "OracleReport",
    "UniquenessViolationError",
    "singlet_general",
    "aharonov_state",
    "triplet_basis_4q",
    "five_center_singlet",
    "singlet_sector",
    "verify_against_oracle",
    "canonicalize_phase",
    "state_to_json",
    "state_from_json",
    "write_state_json",
]

# Sector constraint: (sites, spin quantum number of their collective Casimir).
SectorConstraint = tuple[tuple[int, ...], float]

BASIS_CONTRACT = (
    "product basis, lexicographic with site 1 slowest; "
    "local basis ordered m = s, s-1, ..., -s"
)

MAX_SINGLET_PAIRS = 6


class UniquenessViolationError(RuntimeError):
    """A sector claimed to contain exactly one singlet does not."""


@dataclass(frozen=True)
class TargetState:
    """A named entangled state with the sector labels that pin it down."""

    label: str
    vector: np.ndarray
    register: SpinRegister
    sector: tuple[SectorConstraint, ...] = ()


@dataclass(frozen=True)
class OracleReport:
    label: str
    fidelity: float
    sector_dimension: int
    passed: bool


def canonicalize_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    nz = np.flatnonzero(np.abs(vec) > tol)
    if nz.size == 0:
        return vec
    lead = vec[nz[0]]
    return vec * (abs(lead) / lead)


def singlet_general(n: int) -> TargetState:
    """Total-spin-zero state of 2n spin-1/2 centers in the maximal
    (s_{1..n} = s_{n+1..2n} = n/2) sector: an alternating-sign sum of
    paired Dicke states with complementary excitation numbers."""
    if n < 1:
        raise ValueError("need at least one pair of centers")
    if n > MAX_SINGLET_PAIRS:
        raise ValueError(f"size guardrail: n <= {MAX_SINGLET_PAIRS}")
    vec = np.zeros(4**n, dtype=complex)
    for nu in range(n + 1):
        vec += (-1) ** (n - nu) * np.kron(dicke_state(n, nu), dicke_state(n, n - nu))
    vec /= np.sqrt(n + 1)
    first = tuple(range(1, n + 1))
    second = tuple(range(n + 1, 2 * n + 1))
    return TargetState(
        label=f"singlet_{2 * n}q",
        vector=vec,
        register=SpinRegister.from_values([0.5] * (2 * n)),
        sector=((first, n / 2), (second, n / 2)),
    )


def aharonov_state() -> TargetState:
    """The totally antisymmetric singlet of three spin-1 centers: the
    signed sum over all permutations of (0, 1, -1), oriented so the
    amplitude of |0, 1, -1> is +1/sqrt(6)."""
    import itertools

    register = SpinRegister.from_values([1, 1, 1])
    vec = np.zeros(27, dtype=complex)
    reference = (0, 1, -1)
    for perm in itertools.permutations(reference):
        order = [reference.index(m) for m in perm]
        inversions = sum(
            1 for a in range(3) for b in range(a + 1, 3) if order[a] > order[b]
        )
        vec[basis_index(register, perm)] = (-1) ** inversions
    vec /= np.sqrt(6)
    return TargetState(label="aharonov", vector=vec, register=register, sector=())


def _pair_triplet(m: int) -> np.ndarray:
    """|s=1, m> of two qubits."""
    vec = np.zeros(4, dtype=complex)
    if m == 1:
        vec[0b00] = 1.0
    elif m == -1:
        vec[0b11] = 1.0
    else:
        vec[0b01] = vec[0b10] = 1 / np.sqrt(2)
    return vec


def triplet_basis_4q() -> tuple[TargetState, TargetState, TargetState]:
    """The S = 1 multiplet of four qubits in the (12)(34) scheme with
    s12 = s34 = 1, returned as (|M=1>, |M=0>, |M=-1>).

    |M=0> is (|uudd> - |dduu>)/sqrt(2); the M = +-1 members are the
    antisymmetric pair combinations (see module docstring).
    """
    register = SpinRegister.from_values([0.5] * 4)
    sector = (((1, 2), 1.0), ((3, 4), 1.0), ((1, 2, 3, 4), 1.0))
    states = []
    for m_total in (1, 0, -1):
        vec = np.zeros(16, dtype=complex)
        for m1 in (1, 0, -1):
            m2 = m_total - m1
            if abs(m2) > 1:
                continue
            c = clebsch_gordan(1, m1, 1, m2, 1, m_total)
            vec += c * np.kron(_pair_triplet(m1), _pair_triplet(m2))
        states.append(
            TargetState(
                label=f"triplet_m{m_total:+d}",
                vector=canonicalize_phase(vec),
                register=register,
                sector=sector,
            )
        )
    return tuple(states)


def five_center_singlet() -> TargetState:
    """Unique singlet of four spin-1/2 centers plus one spin-1 center within
    the s12 = s34 = s1234 = 1 sector: (|M=-1>|1> - |M=0>|0> + |M=1>|-1>)/sqrt(3)
    over the triplet basis of the first four centers."""
    register = SpinRegister.from_values([0.5, 0.5, 0.5, 0.5, 1])
    m_plus, m_zero, m_minus = triplet_basis_4q()
    by_m = {1: m_plus.vector, 0: m_zero.vector, -1: m_minus.vector}
    vec = np.zeros(48, dtype=complex)
    for m in (1, 0, -1):
        qutrit = np.zeros(3, dtype=complex)
        qutrit[1 - (-m)] = 1.0
        vec += clebsch_gordan(1, m, 1, -m, 0, 0) * np.kron(by_m[m], qutrit)
    return TargetState(
        label="five_center_singlet",
        vector=canonicalize_phase(vec),
        register=register,
        sector=(((1, 2), 1.0), ((3, 4), 1.0), ((1, 2, 3, 4), 1.0)),
    )


def _eigenspace(op: np.ndarray, eigenvalue: float, tol: float = 1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(op)
    return v[:, np.abs(w - eigenvalue) < tol]


def singlet_sector(
    register: SpinRegister, constraints: tuple[SectorConstraint, ...] = ()
) -> np.ndarray:
    """Orthonormal basis (columns) of the total-singlet subspace restricted to
    the given partial-Casimir sector. Built by direct diagonalization only,
    independent of any Clebsch-Gordan machinery."""
    basis = _eigenspace(casimir(register), 0.0)
    for sites, s in constraints:
        if basis.shape[1] == 0:
            break
        target = s * (s + 1)
        proj_basis = _eigenspace(casimir(register, sites), target)
        proj = proj_basis @ proj_basis.conj().T
        overlap = basis.conj().T @ proj @ basis
        w, v = np.linalg.eigh(overlap)
        basis = basis @ v[:, w > 1 - 1e-9]
    return basis


def verify_against_oracle(state: TargetState, expect_unique: bool = True) -> OracleReport:
    """Check a constructed state against the sector-projection oracle.

    Fidelity is the squared norm of the state's projection onto the oracle
    subspace; with ``expect_unique`` a sector dimension other than one raises
    :class:`UniquenessViolationError`.
    """
    basis = singlet_sector(state.register, state.sector)
    dim = basis.shape[1]
    if expect_unique and dim != 1:
        raise UniquenessViolationError(
            f"{state.label}: sector contains {dim} singlets, expected exactly one"
        )
    fidelity = float(np.linalg.norm(basis.conj().T @ state.vector) ** 2)
    return OracleReport(
        label=state.label,
        fidelity=fidelity,
        sector_dimension=dim,
        passed=fidelity >= 1 - 1e-12,
    )


def state_to_json(state: TargetState, tol: float = 1e-15) -> dict:
    """JSON-serializable form: sparse (basis-index, re, im) amplitude triples."""
    amplitudes = [
        [int(i), float(state.vector[i].real), float(state.vector[i].imag)]
        for i in np.flatnonzero(np.abs(state.vector) > tol)
    ]
    return {
        "basis_ordering": BASIS_CONTRACT,
        "label": state.label,
        "register_twice_s": [sp.twice_s for sp in state.register.spins],
        "sector": [[list(sites), s] for sites, s in state.sector],
        "amplitudes": amplitudes,
    }


def state_from_json(payload: dict) -> TargetState:
    register = SpinRegister(tuple(Spin(int(t)) for t in payload["register_twice_s"]))
    vec = np.zeros(register.dim, dtype=complex)
    for i, re, im in payload["amplitudes"]:
        vec[int(i)] = re + 1j * im
    sector = tuple((tuple(sites), float(s)) for sites, s in payload.get("sector", []))
    return TargetState(
        label=payload.get("label", "state"),
        vector=vec,
        register=register,
        sector=sector,
    )


def write_state_json(state: TargetState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_json(state), indent=2, sort_keys=True))
