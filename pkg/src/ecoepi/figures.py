"""Figure rendering for the reporting commands.

Everything goes straight to files through the Agg backend; no interactive
windows are ever opened.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_COLORS = {"S": "tab:blue", "I": "tab:red", "P": "tab:green"}


def plot_trajectory(traj, path, title=None):
    """Plot S, I, P against the step index and save to path."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    n = range(traj.start, traj.start + len(traj))
    ax.plot(n, traj.S, color=_COLORS["S"], lw=1.2, label="susceptible prey")
    ax.plot(n, traj.I, color=_COLORS["I"], lw=1.2, label="infected prey")
    ax.plot(n, traj.P, color=_COLORS["P"], lw=1.2, label="predators")
    ax.set_xlabel("step")
    ax.set_ylabel("population")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_lambda_scan(report, path, title=None):
    """Plot the window-product sweep with the critical level marked."""
    lams = [e[0] for e in report.entries]
    lower = [e[1] for e in report.entries]
    upper = [e[2] for e in report.entries]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(lams, upper, "o-", ms=3.5, lw=1.1, color="tab:blue",
            label="upper window product")
    ax.plot(lams, lower, "s-", ms=3.5, lw=1.1, color="tab:orange",
            label="lower window product")
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("window length minus one")
    ax.set_ylabel("threshold quotient product")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3, which="both")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
