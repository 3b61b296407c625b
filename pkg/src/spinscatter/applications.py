"""Consumers of the extracted states: ancilla-assisted telecloning from the
2n-center singlet, and GHZ/W production from the five-center singlet.

Telecloning layout: the input qubit X is the slowest factor, followed by the
2n resource centers in register order; center 1 is the port, centers 2..n the
ancillae and centers n+1..2n the receivers. The Bell measurement on (X, port)
is ideal and projective. Per-branch local corrections at the receivers are
not hardcoded: for each Bell outcome the best single-qubit frame is picked
from the 24-element Clifford group by maximizing the average clone fidelity
over the six axis states, which recovers the Pauli frame expected from the
resource's covariance.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .registers import SpinRegister, density_matrix, product_state
from .spinalg import dicke_state
from .states import (
    TargetState,
    UniquenessViolationError,
    five_center_singlet,
    triplet_basis_4q,
    verify_against_oracle,
)

__all__ = [
    "TelecloningSetup",
    "BellOutcome",
    "CloneReport",
    "TelecloningBranch",
    "GhzwBranch",
    "CloneSweep",
    "bell_states",
    "single_qubit_cliffords",
    "telecloning_run",
    "clone_fidelity_sweep",
    "write_clone_sweep_csv",
    "ghz_w_run",
    "five_center_extraction",
    "schmidt_rank",
]

BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")
MAX_CLONES = 6


@dataclass(frozen=True)
class TelecloningSetup:
    """One telecloning instance: n receivers and the input amplitudes.

    ``alpha`` multiplies the down state and ``beta`` the up state of the
    input qubit; |alpha|^2 + |beta|^2 must be 1.
    """

    n: int
    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_CLONES:
            raise ValueError(f"clone count n must be in 1..{MAX_CLONES}")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1) > 1e-10:
            raise ValueError("input amplitudes must be normalized")

    @property
    def input_ket(self) -> np.ndarray:
        # local basis is (up, down)
        return np.array([self.beta, self.alpha], dtype=complex)

    @property
    def roles(self) -> dict[str, tuple[int, ...]]:
        n = self.n
        return {
            "X": (0,),
            "port": (1,),
            "ancillae": tuple(range(2, n + 1)),
            "receivers": tuple(range(n + 1, 2 * n + 1)),
        }


@dataclass(frozen=True)
class BellOutcome:
    """One Bell-measurement branch on (X, port)."""

    which: str
    probability: float
    post_state: np.ndarray  # ancillae (x) receivers, normalized


@dataclass(frozen=True)
class CloneReport:
    """Receiver-side summary of one branch, after the local correction."""

    receiver_states: tuple[np.ndarray, ...]
    receiver_fidelities: tuple[float, ...]
    correction: str
    ancilla_receiver_amplitudes: np.ndarray  # over Dicke (x) Dicke products
    dicke_residual: float


@dataclass(frozen=True)
class TelecloningBranch:
    outcome: BellOutcome
    clones: CloneReport


@dataclass(frozen=True)
class GhzwBranch:
    outcome_m: int
    probability: float
    post_state: np.ndarray
    family: str  # "GHZ" or "W"
    reference_fidelity: float


@dataclass(frozen=True)
class CloneSweep:
    n: int
    seed: int
    inputs: np.ndarray  # samples x 2 complex (beta, alpha)
    fidelities: np.ndarray  # samples x n
    mean: float
    std: float


def bell_states() -> dict[str, np.ndarray]:
    """The four maximally entangled two-qubit states."""
    s = 1 / np.sqrt(2)
    return {
        "phi_plus": np.array([s, 0, 0, s], dtype=complex),
        "phi_minus": np.array([s, 0, 0, -s], dtype=complex),
        "psi_plus": np.array([0, s, s, 0], dtype=complex),
        "psi_minus": np.array([0, s, -s, 0], dtype=complex),
    }


@functools.lru_cache(maxsize=1)
def single_qubit_cliffords() -> tuple[np.ndarray, ...]:
    """The 24 single-qubit Clifford unitaries (phase-canonicalized closure
    of the Hadamard and phase gates)."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j]).astype(complex)

    def canon(u: np.ndarray) -> np.ndarray:
        flat = u.reshape(-1)
        lead = flat[np.flatnonzero(np.abs(flat) > 1e-9)[0]]
        u = u * (abs(lead) / lead)
        return np.round(u, 12) + 0.0

    group: dict[bytes, np.ndarray] = {}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            key = canon(u).tobytes()
            if key in group:
                continue
            group[key] = u
            nxt.extend([h @ u, s @ u])
        frontier = nxt
    assert len(group) == 24
    return tuple(group.values())


def _haar_qubit(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


def _correction_name(u: np.ndarray, index: int) -> str:
    """Readable name for a correction that is a Pauli up to global phase."""
    paulis = {
        "identity": np.eye(2),
        "pauli_x": np.array([[0, 1], [1, 0]]),
        "pauli_y": np.array([[0, -1j], [1j, 0]]),
        "pauli_z": np.diag([1, -1]),
    }
    for name, p in paulis.items():
        overlap = abs(np.trace(p.conj().T @ u)) / 2
        if abs(overlap - 1) < 1e-9:
            return name
    return f"clifford_{index}"


def _single_site_reduced(vec: np.ndarray, n_sites: int, site: int) -> np.ndarray:
    """Reduced density matrix of one qubit from a pure n_sites-qubit state."""
    before = 2**site
    after = 2 ** (n_sites - site - 1)
    t = vec.reshape(before, 2, after)
    return np.einsum("aib,ajb->ij", t, t.conj())


def _branch_post_states(setup: TelecloningSetup) -> dict[str, tuple[float, np.ndarray]]:
    """Bell probabilities and normalized post-states over ancillae+receivers."""
    from .states import singlet_general

    resource = singlet_general(setup.n).vector
    total = np.kron(setup.input_ket, resource)
    folded = total.reshape(4, -1)
    out = {}
    for label, bell in bell_states().items():
        branch = bell.conj() @ folded
        p = float(np.linalg.norm(branch) ** 2)
        out[label] = (p, branch / np.linalg.norm(branch))
    return out


@functools.lru_cache(maxsize=None)
def _branch_corrections(n: int) -> dict[str, int]:
    """Index of the best per-receiver Clifford correction for each branch,
    chosen by the average clone fidelity over the six axis states."""
    axis_states = [
        np.array([1, 0], complex),
        np.array([0, 1], complex),
        np.array([1, 1], complex) / np.sqrt(2),
        np.array([1, -1], complex) / np.sqrt(2),
        np.array([1, 1j], complex) / np.sqrt(2),
        np.array([1, -1j], complex) / np.sqrt(2),
    ]
    cliffords = single_qubit_cliffords()
    n_sites = 2 * n - 1
    receiver_sites = range(n - 1, 2 * n - 1)
    best: dict[str, int] = {}
    for label in BELL_LABELS:
        scores = np.zeros(len(cliffords))
        for ket in axis_states:
            setup = TelecloningSetup(n=n, alpha=ket[1], beta=ket[0])
            _, post = _branch_post_states(setup)[label]
            reduced = [
                _single_site_reduced(post, n_sites, site) for site in receiver_sites
            ]
            for idx, u in enumerate(cliffords):
                for rho in reduced:
                    scores[idx] += float(
                        (ket.conj() @ (u @ rho @ u.conj().T) @ ket).real
                    )
        best[label] = int(np.argmax(scores))
    return best


def telecloning_run(setup: TelecloningSetup) -> dict[str, TelecloningBranch]:
    """Distribute optimal clones of the input over the n receivers.

    Returns one branch per Bell outcome; each clone report applies that
    branch's local correction and decomposes the post-state over products of
    ancilla and receiver Dicke states (the residual outside that span is
    reported, not assumed zero).
    """
    n = setup.n
    cliffords = single_qubit_cliffords()
    corrections = _branch_corrections(n)
    branches = _branch_post_states(setup)
    ket = setup.input_ket
    n_sites = 2 * n - 1
    dicke_anc = [dicke_state(n - 1, a) for a in range(n)]
    dicke_rec = [dicke_state(n, r) for r in range(n + 1)]
    out = {}
    for label, (p, post) in branches.items():
        u = cliffords[corrections[label]]
        states, fids = [], []
        for site in range(n - 1, 2 * n - 1):
            rho = _single_site_reduced(post, n_sites, site)
            rho = u @ rho @ u.conj().T
            states.append(rho)
            fids.append(float((ket.conj() @ rho @ ket).real))
        amps = np.array(
            [[np.vdot(np.kron(a, r), post) for r in dicke_rec] for a in dicke_anc]
        )
        residual = float(1.0 - np.linalg.norm(amps) ** 2)
        out[label] = TelecloningBranch(
            outcome=BellOutcome(which=label, probability=p, post_state=post),
            clones=CloneReport(
                receiver_states=tuple(states),
                receiver_fidelities=tuple(fids),
                correction=_correction_name(u, corrections[label]),
                ancilla_receiver_amplitudes=amps,
                dicke_residual=residual,
            ),
        )
    return out


def clone_fidelity_sweep(n: int, samples: int, seed: int) -> CloneSweep:
    """Receiver fidelity statistics over Haar-random inputs (phi_plus branch)."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    inputs = np.empty((samples, 2), dtype=complex)
    fids = np.empty((samples, n))
    for i in range(samples):
        ket = _haar_qubit(rng)
        inputs[i] = ket
        setup = TelecloningSetup(n=n, alpha=ket[1], beta=ket[0])
        branch = telecloning_run(setup)["phi_plus"]
        fids[i] = branch.clones.receiver_fidelities
    return CloneSweep(
        n=n,
        seed=seed,
        inputs=inputs,
        fidelities=fids,
        mean=float(fids.mean()),
        std=float(fids.std()),
    )


def write_clone_sweep_csv(
    sweep: CloneSweep, path: str | Path, header_comments: Sequence[str] = ()
) -> None:
    """CSV with columns (sample_index, alpha_re, alpha_im, beta_re, beta_im,
    fidelity); one row per sample with the receiver-averaged fidelity."""
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "alpha_re", "alpha_im", "beta_re", "beta_im", "fidelity"])
        for i in range(sweep.inputs.shape[0]):
            beta, alpha = sweep.inputs[i]
            writer.writerow(
                [
                    i,
                    format(alpha.real, ".17g"),
                    format(alpha.imag, ".17g"),
                    format(beta.real, ".17g"),
                    format(beta.imag, ".17g"),
                    format(float(sweep.fidelities[i].mean()), ".17g"),
                ]
            )


def ghz_w_run(state: TargetState | None = None) -> dict[int, GhzwBranch]:
    """Measure the spin-1 center of the five-center singlet in its
    computational basis and classify the four-qubit post-states.

    Outcomes m5 = +1, 0, -1 project onto the triplet-basis states
    |M = -1>, |M = 0>, |M = +1> respectively; the M = 0 branch is GHZ-class,
    the M = +-1 branches are W-class (single-excitation states up to the
    local unitary Z1 Z2).
    """
    if state is None:
        state = five_center_singlet()
    plus, zero, minus = triplet_basis_4q()
    triplet = {1: plus.vector, 0: zero.vector, -1: minus.vector}
    folded = state.vector.reshape(16, 3)
    out = {}
    for column, m5 in enumerate((1, 0, -1)):
        branch = folded[:, column]
        p = float(np.linalg.norm(branch) ** 2)
        post = branch / np.linalg.norm(branch)
        reference = triplet[-m5]
        fid = float(abs(np.vdot(reference, post)) ** 2)
        out[m5] = GhzwBranch(
            outcome_m=m5,
            probability=p,
            post_state=post,
            family="GHZ" if m5 == 0 else "W",
            reference_fidelity=fid,
        )
    return out


def five_center_extraction(
    j: float = 2.0,
    k: float = 1.0,
    max_launches: int = 64,
    initial_m: Sequence[float] = (0.5, 0.5, -0.5, -0.5, 0),
):
    """Prepare the five-center singlet by extraction from a product state
    (default |uudd>|0>), after confirming the target sector holds exactly
    one singlet."""
    from .extraction import ProtocolConfig, run
    from .scattering import ScatteringConfig, rc_positions

    target = five_center_singlet()
    report = verify_against_oracle(target)  # raises on sector degeneracy
    if not report.passed:
        raise UniquenessViolationError(
            f"five-center singlet failed its oracle check (fidelity {report.fidelity})"
        )
    register = SpinRegister.from_values([0.5, 0.5, 0.5, 0.5, 1])
    config = ProtocolConfig(
        scattering=ScatteringConfig(
            register=register,
            positions=rc_positions(k, [1] * 4),
            j=j,
            k=k,
        ),
        initial_centers=density_matrix(product_state(register, initial_m)),
        target=target,
        max_launches=max_launches,
    )
    return run(config)


def schmidt_rank(vec: np.ndarray, dims: Sequence[int], cut_site: int, tol: float = 1e-10) -> int:
    """Schmidt rank of a pure state across the bipartition that isolates one
    subsystem (0-based) from the rest."""
    dims = tuple(int(d) for d in dims)
    before = int(np.prod(dims[:cut_site])) if cut_site > 0 else 1
    d = dims[cut_site]
    after = int(np.prod(dims[cut_site + 1 :])) if cut_site < len(dims) - 1 else 1
    t = np.transpose(vec.reshape(before, d, after), (1, 0, 2)).reshape(d, before * after)
    return int((np.linalg.svd(t, compute_uv=False) > tol).sum())
