"""Figure rendering for run outputs.

Every report path saves matplotlib figures next to the delimited output:
trajectory/energy panels for time series, field profiles for snapshots and
log-log ladders for convergence reports.  Rendering is headless (Agg) and
file-only.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def render_timeseries(ledger, trajectory, path, title=""):
    """Four panels: particle phase space, energy constituents, total-energy
    drift, and the velocity decay on a log scale."""
    t = ledger.t
    y, v = trajectory.eval(t)
    H = ledger.H

    fig, axes = plt.subplots(2, 2, figsize=(11, 7))
    if title:
        fig.suptitle(title)

    ax = axes[0, 0]
    ax.plot(t, np.atleast_1d(y), "b-", label="y(t)")
    ax.plot(t, np.atleast_1d(v), "r--", label="v(t)")
    ax.set_xlabel("t")
    ax.set_title("particle")
    ax.legend()
    ax.grid(alpha=0.3)

    ax = axes[0, 1]
    ax.plot(t, ledger.T_p, label="T_p")
    ax.plot(t, ledger.T_f, label="T_f")
    ax.plot(t, ledger.U_ff, label="U_ff")
    ax.plot(t, ledger.U_fp, label="U_fp")
    ax.plot(t, H, "k-", lw=2, label="H")
    ax.set_xlabel("t")
    ax.set_title("energy constituents")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)

    ax = axes[1, 0]
    ax.plot(t, H - H[0], "k-")
    ax.set_xlabel("t")
    ax.set_title("H(t) - H(0)")
    ax.grid(alpha=0.3)

    ax = axes[1, 1]
    speeds = np.abs(np.atleast_1d(v))
    if np.any(speeds > 0):
        ax.semilogy(t, np.where(speeds > 0, speeds, np.nan), "r-")
    ax.set_xlabel("t")
    ax.set_title("|v(t)|")
    ax.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_snapshot(x, phi, dphi_dx, dphi_dt, t, path):
    fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
    for ax, data, label in zip(axes, (phi, dphi_dx, dphi_dt),
                               ("phi", "dphi/dx", "dphi/dt")):
        ax.plot(x, data, "b-", lw=1)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0].set_title(f"field at t = {t:g}")
    axes[-1].set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_convergence(report, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(report.ladder, report.errors, "o-")
    ax.set_xlabel(report.parameter)
    ax.set_ylabel("error")
    ax.invert_xaxis()
    label = title or f"{report.parameter} refinement (order ~ {report.estimated_order:.2f})"
    ax.set_title(label)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path
