"""Figure rendering for the CLI report path.

Every plot goes straight to a file through the Agg backend; nothing is shown
interactively. PNG metadata is stripped so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_extraction_traces",
    "save_channel_profile",
    "save_clone_fidelities",
    "save_ghzw_probabilities",
]

_SAVEKW = {"dpi": 160, "metadata": {"Software": None}}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)
    return path


def save_extraction_traces(traces: Mapping[str, tuple[np.ndarray, np.ndarray, np.ndarray]],
                           path: str | Path) -> Path:
    """Fidelity and success probability against the launch count, one pair of
    panels, one curve per labelled series. Values are (nu, F, P) triples."""
    fig, (ax_f, ax_p) = plt.subplots(2, 1, figsize=(6.0, 6.4), sharex=True)
    for label, (nu, fid, prob) in traces.items():
        ax_f.plot(nu, fid, marker="o", ms=3.5, label=label)
        ax_p.plot(nu, prob, marker="s", ms=3.5, label=label)
    ax_f.set_ylabel("fidelity F")
    ax_f.set_ylim(-0.02, 1.02)
    ax_f.legend(frameon=False)
    ax_p.set_ylabel("success probability P")
    ax_p.set_xlabel(r"launches $\nu$")
    ax_p.set_ylim(0, 1.02)
    for ax in (ax_f, ax_p):
        ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_channel_profile(eigenvalues: Sequence[float], t_abs2: Sequence[float],
                         path: str | Path, title: str = "") -> Path:
    """Per-channel transmission probability against the coupling eigenvalue."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    markerline, stemlines, _ = ax.stem(eigenvalues, t_abs2)
    plt.setp(markerline, markersize=5)
    plt.setp(stemlines, linewidth=1.2)
    ax.set_xlabel(r"coupling eigenvalue $\lambda$")
    ax.set_ylabel(r"$|t(\lambda)|^2$")
    ax.set_ylim(0, 1.05)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def save_clone_fidelities(fidelities: np.ndarray, optimum: float, path: str | Path) -> Path:
    """Receiver-averaged clone fidelity per Haar sample, with the optimum line."""
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    per_sample = np.asarray(fidelities).mean(axis=1)
    ax.plot(range(len(per_sample)), per_sample, ".", ms=4)
    ax.axhline(optimum, color="k", lw=1, ls="--", label=f"optimum {optimum:.6f}")
    ax.set_xlabel("sample index")
    ax.set_ylabel("clone fidelity")
    span = max(1e-9, per_sample.max() - per_sample.min())
    ax.set_ylim(optimum - 10 * span - 1e-6, optimum + 10 * span + 1e-6)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_ghzw_probabilities(branches: Mapping[int, tuple[float, str]], path: str | Path) -> Path:
    """Bar chart of qutrit-outcome probabilities with their state families."""
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    outcomes = sorted(branches, reverse=True)
    probs = [branches[m][0] for m in outcomes]
    labels = [f"$m_5={m:+d}$\n{branches[m][1]}" for m in outcomes]
    ax.bar(range(len(outcomes)), probs, width=0.55, color="#4878cf")
    ax.axhline(1 / 3, color="k", lw=1, ls="--")
    ax.set_xticks(range(len(outcomes)), labels)
    ax.set_ylabel("probability")
    ax.set_ylim(0, 0.5)
    return _finish(fig, path)
