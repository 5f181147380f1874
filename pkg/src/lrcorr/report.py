"""Render power and simulation-study reports as figure files.

Imported lazily by the CLI when --figures is given, so the core library
never requires a plotting backend.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def power_figure(payload: dict, path: str) -> str:
    """Bar chart of marginal powers; staircase of stepwise conjunctive
    powers overlaid when a testing order is present in the payload.
    """
    names = list(payload["endpoint_names"])
    marginal_of = dict(zip(names, (float(p) for p in payload["marginal_power"])))
    order = payload.get("order")
    shown = list(order) if order else names

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.bar(range(len(shown)), [marginal_of[n] for n in shown],
           color="#9ecae1", label="marginal power")
    ax.set_xticks(range(len(shown)))
    ax.set_xticklabels(shown)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("power")

    if order:
        stepwise = [float(p) for p in payload["stepwise_power"]]
        ax.step(range(len(order)), stepwise, where="mid", color="#d62728",
                marker="o", label="stepwise conjunctive power")
        for k, p in enumerate(stepwise):
            ax.annotate(f"{p:.2f}", (k, p), textcoords="offset points",
                        xytext=(0, 8), ha="center", fontsize=8)
        ax.set_xlabel("testing order")
    else:
        ax.axhline(float(payload["conjunctive_power"]), color="#d62728",
                   linestyle="--", label="conjunctive power (all endpoints)")
    ax.legend(loc="lower left", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def study_figure(rows: list, path: str) -> str:
    """One point per scenario: mean estimated correlation with 2.5/97.5
    percentile whiskers, and the replicate z-score correlation as a cross.
    """
    rows = [row for row in rows if not row.get("error")]
    fig, ax = plt.subplots(figsize=(7.0, 0.9 * max(3, len(rows))))
    labels = []
    for k, row in enumerate(rows):
        lo, hi = float(row["pct2_5"]), float(row["pct97_5"])
        bar = float(row["rho_bar"])
        ax.plot([lo, hi], [k, k], color="#555555", lw=1.5)
        ax.plot([bar], [k], marker="o", color="#1f77b4")
        ax.plot([float(row["rho_tilde"])], [k], marker="x", color="#d62728")
        labels.append(f"{row['copula']} θ={row['theta']} cens={row['censoring']}")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("correlation of log-rank statistics")
    ax.plot([], [], marker="o", color="#1f77b4", lw=0, label="mean estimate")
    ax.plot([], [], marker="x", color="#d62728", lw=0, label="replicate z correlation")
    ax.legend(loc="best", frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
