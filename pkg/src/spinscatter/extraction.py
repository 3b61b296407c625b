"""Post-selected extraction protocol: unpolarized mobile spins are launched
one at a time, and the centers' state is conditioned on every one of them
being transmitted.

The exact conditional map is

    rho -> Tr_mobile[ T (rho_mobile (x) rho) T^dag ] / p,   p = Tr[...],

evaluated with dense linear algebra (no sampling); the cumulative success
probability multiplies the per-launch p. A reflection terminates a run, so
branches with p below threshold raise :class:`ExtinctBranchError`.
``monte_carlo_run`` validates the exact trace by Bernoulli trajectory
sampling with a seeded generator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .registers import (
    SpinRegister,
    density_matrix,
    maximally_mixed,
    partial_trace,
    product_state,
)
from .scattering import ScatteringConfig, TransmissionOperator, effective_transmission
from .states import TargetState, aharonov_state

__all__ = [
    "ProtocolConfig",
    "ProtocolTrace",
    "MonteCarloTrace",
    "ExtinctBranchError",
    "step",
    "run",
    "monte_carlo_run",
    "aharonov_extraction",
    "write_trace_csv",
]

EXTINCTION_THRESHOLD = 1e-15


class ExtinctBranchError(RuntimeError):
    """Post-selection became impossible (transmission probability ~ 0)."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Inputs of one protocol run.

    ``initial_centers`` is a density operator on the centers' space;
    ``mobile_state`` defaults to the maximally mixed qubit.
    """

    scattering: ScatteringConfig
    initial_centers: np.ndarray
    target: TargetState | None
    max_launches: int
    mobile_state: np.ndarray | None = None
    solver: str = "effective"

    def __post_init__(self) -> None:
        dim = self.scattering.register.dim
        rho = np.asarray(self.initial_centers, dtype=complex)
        if rho.shape != (dim, dim):
            raise ValueError(f"initial state must be {dim}x{dim} for this register")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise ValueError("initial state must have unit trace")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -1e-10:
            raise ValueError("initial state must be positive semidefinite")
        if self.max_launches < 1:
            raise ValueError("max_launches must be at least 1")
        if self.solver not in ("effective", "transfer"):
            raise ValueError("solver must be 'effective' or 'transfer'")
        if self.target is not None and self.target.vector.shape != (dim,):
            raise ValueError("target state dimension does not match register")


@dataclass(frozen=True)
class ProtocolTrace:
    """Per-launch record of the exact conditional evolution."""

    nu: np.ndarray
    fidelity: np.ndarray
    success_probability: np.ndarray
    states: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.nu)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class MonteCarloTrace:
    """Empirical counterpart of a :class:`ProtocolTrace` from trajectory
    sampling; ``fidelity`` refers to the surviving (all-transmitted) ensemble."""

    nu: np.ndarray
    success_probability: np.ndarray
    fidelity: np.ndarray
    trials: int
    seed: int
    survivors: np.ndarray = field(repr=False, default=None)


def step(
    rho_centers: np.ndarray,
    transmission: TransmissionOperator | ScatteringConfig,
    mobile_state: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """One launch: transmit, post-select, renormalize.

    Returns the conditioned centers' state and the transmission probability.
    """
    if isinstance(transmission, ScatteringConfig):
        transmission = effective_transmission(transmission)
    t = transmission.matrix
    dim_c = rho_centers.shape[0]
    if t.shape[0] != 2 * dim_c:
        raise ValueError("transmission operator does not match the centers' space")
    rho_m = maximally_mixed(2) if mobile_state is None else np.asarray(mobile_state, dtype=complex)
    joint = np.kron(rho_m, rho_centers)
    out = t @ joint @ t.conj().T
    p = float(np.trace(out).real)
    if p < EXTINCTION_THRESHOLD:
        raise ExtinctBranchError(f"transmission probability {p:.3e} below threshold")
    rho_next = partial_trace(out, (2, dim_c), keep=(1,)) / p
    # enforce exact hermiticity against roundoff drift
    rho_next = (rho_next + rho_next.conj().T) / 2
    return rho_next, p


def run(config: ProtocolConfig) -> ProtocolTrace:
    """Iterate the conditional map ``max_launches`` times, recording the
    fidelity with the target and the cumulative success probability."""
    if config.solver == "transfer":
        from .scattering import transfer_matrix_transmission

        top = transfer_matrix_transmission(config.scattering)
    else:
        top = effective_transmission(config.scattering)
    rho = np.asarray(config.initial_centers, dtype=complex)
    target = None if config.target is None else config.target.vector
    cumulative = 1.0
    nus, fids, probs, states = [], [], [], []
    for nu in range(1, config.max_launches + 1):
        rho, p = step(rho, top, config.mobile_state)
        cumulative *= p
        nus.append(nu)
        probs.append(cumulative)
        fids.append(
            float((target.conj() @ rho @ target).real) if target is not None else float("nan")
        )
        states.append(rho)
    return ProtocolTrace(
        nu=np.array(nus),
        fidelity=np.array(fids),
        success_probability=np.array(probs),
        states=tuple(states),
    )


def monte_carlo_run(config: ProtocolConfig, trials: int, seed: int) -> MonteCarloTrace:
    """Sample transmit/reflect trajectories of the protocol.

    The conditioned state sequence is deterministic, so survival of each
    trajectory is a product of independent Bernoulli draws with the exact
    per-step probabilities; the empirical success probability is the
    surviving fraction per launch.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    exact = run(config)
    per_step = np.empty(len(exact))
    per_step[0] = exact.success_probability[0]
    per_step[1:] = exact.success_probability[1:] / exact.success_probability[:-1]
    rng = np.random.default_rng(seed)
    draws = rng.random((trials, len(exact)))
    alive = np.cumprod(draws < per_step[None, :], axis=1)
    survivors = alive.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        fidelity = np.where(survivors > 0, exact.fidelity, np.nan)
    return MonteCarloTrace(
        nu=exact.nu.copy(),
        success_probability=survivors / trials,
        fidelity=fidelity,
        trials=trials,
        seed=seed,
        survivors=survivors,
    )


def aharonov_extraction(
    j: float = 2.0,
    k: float = 1.0,
    max_launches: int = 64,
    initial_m: Sequence[float] = (0, 1, -1),
) -> ProtocolTrace:
    """Extract the three-qutrit antisymmetric singlet from one of its product
    components (default |0, 1, -1>)."""
    from .scattering import rc_positions

    register = SpinRegister.from_values([1, 1, 1])
    config = ProtocolConfig(
        scattering=ScatteringConfig(
            register=register,
            positions=rc_positions(k, [1, 1]),
            j=j,
            k=k,
        ),
        initial_centers=density_matrix(product_state(register, initial_m)),
        target=aharonov_state(),
        max_launches=max_launches,
    )
    return run(config)


def write_trace_csv(
    trace: ProtocolTrace | MonteCarloTrace,
    path: str | Path,
    header_comments: Sequence[str] = (),
) -> None:
    """CSV with columns (nu, fidelity, success_probability)."""
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["nu", "fidelity", "success_probability"])
        for nu, fid, prob in zip(trace.nu, trace.fidelity, trace.success_probability):
            writer.writerow([int(nu), format(fid, ".17g"), format(prob, ".17g")])
