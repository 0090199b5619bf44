"""Figure rendering for the report paths of the CLI.

All figures are written to files (PNG by default); no interactive backend
is ever touched.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .calibration import pw_loss_at, segment_grid
from .model import Interconnector
from .study import StudyReport


def plot_scenario_comparison(report: StudyReport, path) -> None:
    """Bar chart: loss deltas (GWh) per scenario plus cost savings (MEUR)."""
    rows = [r for r in report.rows if r.scenario != report.reference]
    labels = [r.scenario for r in rows]
    x = np.arange(len(rows))
    width = 0.3

    fig, ax = plt.subplots(figsize=(9, 5))
    ax.bar(x - width, [r.delta_hvdc_gwh for r in rows], width, label="HVDC loss delta")
    ax.bar(x, [r.delta_ac_gwh for r in rows], width, label="AC loss delta")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_ylabel("loss delta vs reference [GWh]")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right")

    ax2 = ax.twinx()
    ax2.bar(x + width, [r.cost_savings_meur for r in rows], width,
            color="tab:green", label="cost savings")
    ax2.set_ylabel("cost savings [MEUR]")

    h1, l1 = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(h1 + h2, l1 + l2, loc="best")
    ax.set_title(f"Scenario comparison vs {report.reference}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rmse_tradeoff(entries: Sequence[tuple[str, float, float]], path) -> None:
    """Approximation RMSE vs solve time, log scales; entries are
    (label, rmse_mw, seconds)."""
    labels = [e[0] for e in entries]
    rmse = [e[1] for e in entries]
    secs = [e[2] for e in entries]

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(secs, rmse, "o-")
    for lab, s, r in zip(labels, secs, rmse):
        ax.annotate(lab, (s, r), textcoords="offset points", xytext=(6, 4))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("series solve time [s]")
    ax.set_ylabel("fleet loss-approximation RMSE [MW]")
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title("Accuracy vs computational cost")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_loss_curves(line: Interconnector, path, *,
                     grid_step: float = 1.0) -> None:
    """Quadratic loss curve of one line against its calibrated factors."""
    model = line.loss_model
    if model is None:
        raise ValueError(f"line {line.id} has no loss model")
    fs = np.arange(0.0, line.rated_capacity + grid_step / 2, grid_step)
    true = model.quad_a * fs ** 2 + model.quad_b * fs + model.quad_c

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(fs, true, label="quadratic", linewidth=2)
    if model.linear is not None:
        ax.plot(fs, model.linear.alpha * fs + model.linear.beta,
                "--", label="linear factors")
    if model.piecewise:
        approx = [pw_loss_at(model.piecewise, f) for f in fs]
        ax.plot(fs, approx, ":", label=f"piecewise ({len(model.piecewise)} segments)")
    ax.set_xlabel("flow magnitude [MW]")
    ax.set_ylabel("loss [MW]")
    ax.set_title(f"Loss approximation: {line.id}")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
