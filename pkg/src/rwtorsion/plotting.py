"""Headless figure rendering for the CLI report path.

Uses the object-oriented matplotlib API with an Agg canvas directly, so
importing this module never touches a display backend.
"""

from __future__ import annotations

import os
from collections.abc import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _save(fig: Figure, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    return path


def heat_content_figure(path: str, t_values: Sequence[float], q_values: Sequence[float]) -> str:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.plot(t_values, q_values, marker="o", color="tab:blue")
    ax.set_xlabel("t")
    ax.set_ylabel("Q(t)")
    ax.set_title("Heat content")
    if len(q_values) > 1 and min(q_values) > 0:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def moments_figure(path: str, orders: Sequence[int], values: Sequence[float]) -> str:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    ax.bar([str(j) for j in orders], values, color="tab:blue")
    ax.set_xlabel("moment order j")
    ax.set_ylabel("E[tau^j] integrated against nu")
    ax.set_title("Exit time moments")
    if len(values) > 1 and min(values) > 0 and max(values) / min(values) > 50:
        ax.set_yscale("log")
    return _save(fig, path)


def rescale_figure(
    path: str,
    eps_values: Sequence[float],
    estimates: Sequence[float],
    reference: float | None = None,
) -> str:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    order = np.argsort(eps_values)
    eps_sorted = np.asarray(eps_values)[order]
    est_sorted = np.asarray(estimates)[order]
    ax.plot(eps_sorted, est_sorted, marker="o", color="tab:blue", label="rescaled rigidity")
    if reference is not None:
        ax.axhline(reference, color="tab:red", linestyle="--", label="reference")
        ax.legend()
    ax.set_xlabel("eps")
    ax.set_ylabel("rescaled torsional rigidity")
    ax.set_title("Nonlocal-to-local rescaling")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def audit_figure(path: str, names: Sequence[str], slacks: Sequence[float], passed: Sequence[bool]) -> str:
    """Horizontal bars of per-check slack; failures drawn in red."""
    n = max(1, len(names))
    fig = Figure(figsize=(7.0, 0.45 * n + 1.2))
    ax = fig.add_subplot()
    pos = np.arange(len(names))
    colors = ["tab:green" if ok else "tab:red" for ok in passed]
    shown = np.sign(slacks) * np.log10(1.0 + np.abs(slacks) * 1e12)
    ax.barh(pos, shown, color=colors)
    ax.set_yticks(pos)
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("signed log10(1 + |slack| * 1e12)")
    ax.set_title("Inequality audit slack")
    return _save(fig, path)
