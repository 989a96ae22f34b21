"""Command-line entry point: analytic | duhamel | fdtd | verify.

Usage:
    pointfield <mode> --config <path> [--out <dir>] [--no-figures]

The mode on the command line must match the config's [run] mode.  Every run
directory receives the echoed config, a format marker, the delimited output
and (unless --no-figures) rendered figures alongside it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import plots
from .analytic import DeltaSolution, sample_trajectory
from .config import RunConfig, load_config
from .errors import PointfieldError, SuperluminalVelocity
from .fdtd import run_coupled
from .output import (
    emit_field_snapshot,
    emit_probe_table,
    emit_timeseries,
    prepare_out_dir,
    write_json,
)
from .regularized import (
    GaussianSource,
    dphi_dt_duhamel,
    dphi_dx_duhamel,
    phi_duhamel,
)
from .verify import run_verification


def _output_times(cfg: RunConfig) -> np.ndarray:
    dt = cfg.timestep()
    step = cfg.output_stride * dt
    n_rows = int(np.floor(cfg.t_final / step + 1e-9)) + 1
    return np.arange(n_rows) * step


def _run_analytic(cfg: RunConfig, out: Path, figures: bool) -> int:
    sol = DeltaSolution(cfg.params, horizon=cfg.t_final)
    times = _output_times(cfg)
    ledger = sol.energy_ledger(times)
    emit_timeseries(ledger, sol.traj, out / "timeseries.csv")
    if figures:
        plots.render_timeseries(ledger, sol.traj, out / "timeseries.png",
                                "analytic delta-limit run")
    for ts in cfg.snapshot_times:
        path = emit_field_snapshot(sol, ts, out / f"snapshot_t{ts:g}.csv")
        print(f"[analytic] wrote {path}")
        if figures:
            import csv
            rows = list(csv.reader(open(path)))[1:]
            x = np.array([float(r[0]) for r in rows])
            phi = np.array([float(r[1]) for r in rows])
            gx = np.array([float(r[2]) for r in rows])
            gt = np.array([float(r[3]) if r[3] else np.nan for r in rows])
            plots.render_snapshot(x, phi, gx, gt, ts,
                                  out / f"snapshot_t{ts:g}.png")
    print(f"[analytic] wrote {out / 'timeseries.csv'} ({len(ledger)} rows)")
    return 0


def _run_fdtd(cfg: RunConfig, out: Path, figures: bool) -> int:
    dt = cfg.timestep()
    try:
        result = run_coupled(cfg.params, dx=cfg.dx, dt=dt,
                             t_final=cfg.t_final,
                             output_stride=cfg.output_stride,
                             snapshot_times=cfg.snapshot_times)
    except SuperluminalVelocity as err:
        # flush whatever completed before the diagnostic abort
        if err.partial is not None and len(err.partial.ledger) > 0:
            emit_timeseries(err.partial.ledger, err.partial.trajectory,
                            out / "timeseries.partial.csv")
            print(f"[fdtd] aborted: {err}; partial ledger flushed")
        else:
            print(f"[fdtd] aborted: {err}")
        return 2
    emit_timeseries(result.ledger, result.trajectory, out / "timeseries.csv")
    if figures:
        plots.render_timeseries(result.ledger, result.trajectory,
                                out / "timeseries.png", "coupled grid run")
    for snap in result.snapshots:
        path = emit_field_snapshot(snap, snap.t, out / f"snapshot_t{snap.t:g}.csv")
        print(f"[fdtd] wrote {path}")
        if figures:
            plots.render_snapshot(snap.x, snap.phi, snap.dphi_dx, snap.dphi_dt,
                                  snap.t, out / f"snapshot_t{snap.t:g}.png")
    print(f"[fdtd] wrote {out / 'timeseries.csv'} ({len(result.ledger)} rows, "
          f"grid n={result.grid.n}, dt={dt:g})")
    return 0


def _run_duhamel(cfg: RunConfig, out: Path, figures: bool) -> int:
    p = cfg.params
    traj = sample_trajectory(p.with_sigma(0.0), cfg.t_final)
    src = GaussianSource(p.sigma, p.beta)
    for ts in cfg.snapshot_times:
        if cfg.probes:
            xs = np.asarray(cfg.probes, dtype=float)
        else:
            reach = p.c * ts + 0.1 * p.c * max(ts, p.damping_time / 10.0)
            xs = np.linspace(-reach, reach, 201)
        phi = np.array([phi_duhamel(traj, src, float(x), ts, p.c) for x in xs])
        gx = np.array([dphi_dx_duhamel(traj, src, float(x), ts, p.c) for x in xs])
        gt = np.array([dphi_dt_duhamel(traj, src, float(x), ts, p.c) for x in xs])
        path = emit_probe_table(xs, phi, gx, gt, out / f"snapshot_t{ts:g}.csv")
        print(f"[duhamel] wrote {path} ({len(xs)} probes)")
        if figures:
            plots.render_snapshot(xs, phi, gx, gt, ts,
                                  out / f"snapshot_t{ts:g}.png")
    return 0


def _run_verify(cfg: RunConfig, out: Path, figures: bool) -> int:
    report = run_verification(cfg.params, out_dir=out, render=figures)
    for crit in report["criteria"]:
        status = "PASS" if crit["pass"] else "FAIL"
        print(f"{crit['criterion_id']}: {status}  measured={crit['measured']:.6g} "
              f"tolerance={crit['tolerance']:.6g}  ({crit['runtime_sec']:.1f}s)")
    n_pass = sum(1 for crit in report["criteria"] if crit["pass"])
    print(f"[verify] {n_pass}/{len(report['criteria'])} criteria passed; "
          f"report at {out / 'report.json'}")
    return 0 if report["all_pass"] else 1


_RUNNERS = {
    "analytic": _run_analytic,
    "duhamel": _run_duhamel,
    "fdtd": _run_fdtd,
    "verify": _run_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pointfield",
        description="1D wave field coupled to a self-interacting point "
                    "particle: analytic, Duhamel-quadrature and grid tiers",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in _RUNNERS:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, help="path to the run config")
        sp.add_argument("--out", default=None,
                        help="output directory (overrides [paths] out_dir)")
        sp.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg.mode != args.mode:
            parser.error(f"config mode {cfg.mode!r} does not match "
                         f"subcommand {args.mode!r}")
        out = prepare_out_dir(args.out or cfg.out_dir, cfg.raw_text)
        return _RUNNERS[args.mode](cfg, out, figures=not args.no_figures)
    except PointfieldError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
