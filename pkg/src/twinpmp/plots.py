"""Static SVG figures drawn from the trace table (never from solver internals)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {"svg.hashsalt": "twinpmp", "svg.fonttype": "none", "figure.figsize": (7.0, 3.6)}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_controls(trace: dict, path) -> Path:
    """Plant-optimal and model-based controls overlaid."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(trace["t"], trace["u_plant"], lw=2.2, label="plant-optimal u")
        ax.plot(trace["t"], trace["u_model"], "--", lw=1.4, label="model-based u")
        ax.set_xlabel("t")
        ax.set_ylabel("u")
        ax.legend(loc="best")
        _save(fig, path)
    return Path(path)


def plot_unconstrained(trace: dict, bounds, path) -> Path:
    """Unconstrained minimizers of both Hamiltonians against the bounds (lo, hi) of U, if any."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(trace["t"], trace["u_uncon_plant"], lw=1.4, label="plant Hamiltonian")
        ax.plot(trace["t"], trace["u_uncon_model"], lw=1.4, label="model Hamiltonian")
        if bounds is not None:
            lo, hi = bounds
            ax.axhline(lo, color="k", lw=0.8, ls=":", label=f"bounds [{lo:g}, {hi:g}]")
            ax.axhline(hi, color="k", lw=0.8, ls=":")
        ax.set_xlabel("t")
        ax.set_ylabel("unconstrained minimizer")
        ax.legend(loc="best")
        _save(fig, path)
    return Path(path)


def plot_states(trace: dict, path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(trace["t"], trace["x_plant"], lw=1.6, label="plant state")
        ax.plot(trace["t"], trace["x_model"], "--", lw=1.6, label="model state")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
        ax.legend(loc="best")
        _save(fig, path)
    return Path(path)
