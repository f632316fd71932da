"""Matplotlib figure rendering for the report paths.

Every CSV table the CLI emits has a figure twin rendered next to it (same
stem, .png); rendering is best-effort and never blocks the numeric output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path) -> str:
    path = Path(path)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def convergence_figure(rows: list[dict], path) -> str:
    """log-log error vs resolution with the measured order annotated."""
    ns = [r["n"] for r in rows]
    max_err = [r["max_err"] for r in rows]
    l2_err = [r["l2_err"] for r in rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ax.loglog(ns, max_err, "o-", label="max error")
    ax.loglog(ns, l2_err, "s--", label="l2 error")
    if len(ns) >= 2 and max_err[0] > 0:
        ref = [max_err[0] * (ns[0] / n) ** 2 for n in ns]
        ax.loglog(ns, ref, ":", color="gray", label="order 2")
    orders = [r["order"] for r in rows if np.isfinite(r.get("order", float("nan")))]
    if orders:
        ax.set_title(f"measured order {orders[-1]:.2f}")
    ax.set_xlabel("grid points per axis")
    ax.set_ylabel("error vs manufactured solution")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    return _finish(fig, path)


def newton_history_figure(report_dict: dict, path) -> str:
    hist = report_dict.get("residual_max_history", [])
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ax.semilogy(range(len(hist)), hist, "o-")
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("projected max residual")
    ax.set_title(f"status: {report_dict.get('status', '?')}")
    ax.grid(True, which="both", alpha=0.25)
    return _finish(fig, path)


def mode_residual_figure(per_mode: list[dict], path) -> str:
    labels = ["".join(str(c) for c in row["k"]) for row in per_mode]
    vals = [max(row["residual"], 1e-300) for row in per_mode]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.bar(range(len(vals)), vals)
    ax.set_yscale("log")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=70, fontsize=7)
    ax.set_xlabel("frequency vector")
    ax.set_ylabel("least-squares residual")
    ax.grid(True, axis="y", which="both", alpha=0.25)
    return _finish(fig, path)


def residual_histogram(values: np.ndarray, path, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ax.hist(np.asarray(values).reshape(-1), bins=40, color="tab:blue", alpha=0.8)
    ax.set_xlabel("residual value")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.25)
    return _finish(fig, path)
