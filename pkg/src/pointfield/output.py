"""Bit-exact delimited output: time series, field snapshots, JSON reports.

Numbers are written with %.17g so a reader recovers every double exactly;
reruns of the same config produce byte-identical files.  Every output
directory also receives the echoed config and a format-version marker.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .analytic import DeltaSolution
from .errors import OutOfRange
from .fdtd import FieldSnapshot
from .params import EnergyLedger
from .trajectory import Trajectory

FORMAT_MARKER = "pointfield output format 1"
# uniform probe count for analytic snapshots; kink points are inserted extra
SNAPSHOT_PROBES = 2001


def fmt(x: float) -> str:
    """Full-precision decimal: shortest of %.17g, round-trip exact."""
    if x == 0.0:
        return "0"  # normalizes -0.0 as well
    return f"{x:.17g}"


def _write_lines(path, lines):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_timeseries(ledger: EnergyLedger, trajectory: Trajectory, path) -> Path:
    """CSV ``t,y,v,T_p,T_f,U_ff,U_fp,H``, one row per ledger entry."""
    lines = ["t,y,v,T_p,T_f,U_ff,U_fp,H"]
    y, v = trajectory.eval(ledger.t)
    y = np.atleast_1d(y)
    v = np.atleast_1d(v)
    H = ledger.H
    for i in range(len(ledger)):
        lines.append(",".join(fmt(val) for val in (
            ledger.t[i], y[i], v[i], ledger.T_p[i], ledger.T_f[i],
            ledger.U_ff[i], ledger.U_fp[i], H[i],
        )))
    _write_lines(path, lines)
    return Path(path)


def _snapshot_lines(x, phi, dphi_dx, dphi_dt, kink_mask=None):
    lines = ["x,phi,dphi_dx,dphi_dt"]
    for i in range(len(x)):
        rate = "" if (kink_mask is not None and kink_mask[i]) else fmt(dphi_dt[i])
        lines.append(f"{fmt(x[i])},{fmt(phi[i])},{fmt(dphi_dx[i])},{rate}")
    return lines


def emit_field_snapshot(source, t: float, path) -> Path:
    """CSV ``x,phi,dphi_dx,dphi_dt``.

    For a grid snapshot the rows are the grid nodes.  For an analytic
    solution the rows are a uniform probe of the light cone plus the three
    kink points (cone edges and particle), which carry their assigned
    derivative values and an empty dphi_dt field.
    """
    if isinstance(source, FieldSnapshot):
        lines = _snapshot_lines(source.x, source.phi, source.dphi_dx,
                                source.dphi_dt)
        _write_lines(path, lines)
        return Path(path)

    if not isinstance(source, DeltaSolution):
        raise TypeError("source must be a FieldSnapshot or DeltaSolution")
    sol = source
    if t < 0.0 or t > sol.horizon * (1.0 + 1e-9):
        raise OutOfRange(f"snapshot time {t} outside [0, {sol.horizon}]")
    c = sol.params.c
    reach = c * t if t > 0.0 else 0.1 * c * sol.params.damping_time
    margin = 0.1 * reach
    x = np.linspace(-reach - margin, reach + margin, SNAPSHOT_PROBES)
    kinks = np.array([-c * t, sol.position(t), c * t]) if t > 0.0 else np.array([0.0])
    x = np.unique(np.concatenate([x, kinks]))
    kink_mask = np.isin(x, kinks)
    phi = sol.phi(x, t)
    dphi_dx = sol.dphi_dx(x, t)
    dphi_dt = np.zeros_like(x)
    if t > 0.0:
        regular = ~kink_mask
        dphi_dt[regular] = sol.dphi_dt(x[regular], t)
    lines = _snapshot_lines(x, phi, dphi_dx, dphi_dt, kink_mask)
    _write_lines(path, lines)
    return Path(path)


def emit_probe_table(x, phi, dphi_dx, dphi_dt, path) -> Path:
    """Snapshot-schema CSV from already-evaluated columns (Duhamel mode)."""
    lines = _snapshot_lines(np.asarray(x, dtype=float),
                            np.asarray(phi, dtype=float),
                            np.asarray(dphi_dx, dtype=float),
                            np.asarray(dphi_dt, dtype=float))
    _write_lines(path, lines)
    return Path(path)


def write_json(payload: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def prepare_out_dir(out_dir, config_text: str) -> Path:
    """Create the run directory with the echoed config and format marker."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.txt", "w", encoding="utf-8", newline="") as fh:
        fh.write(config_text)
    with open(out / "FORMAT", "w", encoding="utf-8", newline="") as fh:
        fh.write(FORMAT_MARKER + "\n")
    return out
