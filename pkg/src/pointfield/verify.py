"""Acceptance verification: eight numbered criteria covering every tier.

Windows and scales are expressed in damping times t_d = 2 m c^3 / beta^2 and
light-travel lengths c*t_d, so the checks are parameter-independent; with
the reference configuration (m = c = beta = 1, v0 = 0.5) they reduce to the
canonical values quoted in the criterion descriptions.

Each criterion reports {criterion_id, measured, tolerance, pass} plus a
detail block with every sub-check.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import analytic, diagnostics
from .fdtd import run_coupled
from .params import PhysicalParams, validate_params
from .regularized import GaussianSource, dphi_dx_duhamel, gradient_bound


def _criterion(cid, description, measured, tolerance, passed, detail=None,
               runtime=None):
    out = {
        "criterion_id": cid,
        "description": description,
        "measured": float(measured),
        "tolerance": float(tolerance),
        "pass": bool(passed),
    }
    if detail:
        out["detail"] = detail
    if runtime is not None:
        out["runtime_sec"] = round(runtime, 3)
    return out


def criterion_a1(p: PhysicalParams) -> dict:
    """Damping: v strictly decreasing, ten-e-folding decay, fitted rate."""
    td = p.damping_time
    sol = analytic.DeltaSolution(p.with_sigma(0.0), horizon=10.0 * td)
    probes = np.linspace(0.0, 10.0 * td, 1000)
    v = np.abs(np.asarray(analytic.velocity(p.with_sigma(0.0), probes)))
    strictly_decreasing = bool(np.all(np.diff(v) < 0.0))

    ratio = float(v[-1] / abs(p.v0))
    ratio_bound = 1.1 * math.exp(-10.0)

    window = np.linspace(5.0 * td, 10.0 * td, 200)
    vw = np.abs(np.asarray(analytic.velocity(p.with_sigma(0.0), window)))
    rate = -np.polyfit(window, np.log(vw), 1)[0]
    rate_theory = p.beta**2 / (2.0 * p.m * p.c**3)
    rate_err = abs(rate - rate_theory) / rate_theory

    passed = strictly_decreasing and ratio < ratio_bound and rate_err < 0.01
    return _criterion(
        "A1", "velocity damping: monotone decay at rate beta^2/(2 m c^3)",
        measured=rate_err, tolerance=0.01, passed=passed,
        detail={
            "strictly_decreasing": strictly_decreasing,
            "v_ratio_at_10_td": ratio,
            "v_ratio_bound": ratio_bound,
            "fitted_rate": float(rate),
            "theoretical_rate": rate_theory,
        },
    )


def criterion_a2(p: PhysicalParams, t_final: float) -> dict:
    """Interaction energy is exactly linear: U_fp = -(beta^2/2c) t."""
    sol = analytic.DeltaSolution(p.with_sigma(0.0), horizon=t_final)
    times = np.linspace(0.0, t_final, 101)
    ledger = sol.energy_ledger(times)
    exact = -(p.beta**2 / (2.0 * p.c)) * times
    worst = float(np.max(np.abs(ledger.U_fp - exact)))
    return _criterion(
        "A2", "analytic U_fp equals -(beta^2/2c) t at every output time",
        measured=worst, tolerance=1e-12, passed=worst <= 1e-12,
        detail={"n_times": len(times)},
    ), ledger, sol


def criterion_a3(p: PhysicalParams) -> dict:
    """Field-energy slope beta^2/4c over late times; T_f identical to U_ff."""
    td = p.damping_time
    sol = analytic.DeltaSolution(p.with_sigma(0.0), horizon=10.0 * td)
    times = np.linspace(0.0, 10.0 * td, 201)
    ledger = sol.energy_ledger(times)
    fit = diagnostics.fit_linear_asymptote(
        ledger, "U_ff", (5.0 * td, 10.0 * td), p)
    tf_gap = float(np.max(np.abs(ledger.T_f - ledger.U_ff)))
    passed = fit.relative_slope_error < 0.01 and tf_gap <= 1e-12
    return _criterion(
        "A3", "analytic U_ff slope is beta^2/4c; T_f series identical to U_ff",
        measured=fit.relative_slope_error, tolerance=0.01, passed=passed,
        detail={"fit": fit.to_dict(), "tf_uff_gap": tf_gap},
    )


def criterion_a4(p: PhysicalParams, ledger) -> dict:
    """Delta-limit energy conservation: H(t) = m v0^2 / 2 to 1e-9 relative."""
    H0 = p.m * p.v0**2 / 2.0
    floor = max(abs(H0), p.m * p.c**2 * 1e-12)
    worst = float(np.max(np.abs(ledger.H - H0)) / floor)
    return _criterion(
        "A4", "analytic H(t) equals m v0^2/2 at all probe times",
        measured=worst, tolerance=1e-9, passed=worst < 1e-9,
        detail={"H0": H0, "n_times": len(ledger)},
    )


def criterion_a5(p: PhysicalParams) -> tuple:
    """Reference coupled run: gradient and position bounds, energy drift."""
    td = p.damping_time
    sigma = 0.01 * p.c * td          # 0.02 at reference
    dx = sigma / 5.0
    dt = 0.5 * dx / p.c              # Courant 0.5
    t_final = 5.0 * td
    p_run = p.with_sigma(sigma)
    result = run_coupled(p_run, dx=dx, dt=dt, t_final=t_final,
                         output_stride=50)
    src = GaussianSource(sigma, p.beta)

    t_out = result.ledger.t
    bound_grad = np.array([gradient_bound(src, p.c, t) for t in t_out])
    grad_ok = bool(np.all(result.max_gradient <= 1.05 * bound_grad + 1e-30))

    y_out, _ = result.trajectory.eval(t_out)
    B = gradient_bound(src, p.c, 1.0)
    y_bound = (B / (6.0 * p.m)) * t_out**3 + abs(p.v0) * t_out
    y_ok = bool(np.all(np.abs(np.atleast_1d(y_out)) <= y_bound + 1e-30))

    drift = diagnostics.energy_residual(result.ledger, p_run)
    passed = grad_ok and y_ok and drift < 1e-3
    crit = _criterion(
        "A5", "coupled-run gradient/position bounds hold; H drift < 1e-3",
        measured=drift, tolerance=1e-3, passed=passed,
        detail={
            "sigma": sigma, "dx": dx, "dt": dt, "t_final": t_final,
            "gradient_bound_ok": grad_ok,
            "position_bound_ok": y_ok,
            "max_gradient_ratio": float(np.max(
                result.max_gradient[1:] / bound_grad[1:])) if len(t_out) > 1 else 0.0,
            "boundary_max": float(np.max(result.boundary_max)),
        },
    )
    return crit, result


def criterion_a6(p: PhysicalParams) -> dict:
    """Regularized gradient matches the piecewise delta-limit values away
    from the kinks, and the worst error at least halves when sigma does."""
    td = p.damping_time
    t = 2.5 * td                      # 5.0 at reference
    sigma = 0.0025 * p.c * td         # 0.005 at reference
    sol = analytic.DeltaSolution(p.with_sigma(0.0), horizon=t)
    y_t = sol.position(t)
    c = p.c

    def worst_error(sig: float) -> float:
        src = GaussianSource(sig, p.beta)
        margin = 15.0 * sig           # strictly beyond the 10 sigma floor
        xs = np.concatenate([
            np.linspace(-c * t + margin, y_t - margin, 25),
            np.linspace(y_t + margin, c * t - margin, 25),
        ])
        exact = sol.dphi_dx(xs, t)
        errs = [abs(dphi_dx_duhamel(sol.traj, src, float(x), t, c) - e) / abs(e)
                for x, e in zip(xs, exact)]
        return float(max(errs))

    err = worst_error(sigma)
    err_half = worst_error(sigma / 2.0)
    halves = err_half <= 0.6 * err
    order = float(np.log2(err / err_half)) if err_half > 0 else float("inf")
    passed = err <= 2e-2 and halves
    return _criterion(
        "A6", "Duhamel gradient matches piecewise form; halving sigma at "
              "least halves the worst error",
        measured=err, tolerance=2e-2, passed=passed,
        detail={
            "sigma": sigma, "t": t, "n_probes": 50,
            "worst_error_half_sigma": err_half,
            "order_in_sigma": order,
        },
    )


def criterion_a7(p: PhysicalParams) -> tuple:
    """sigma -> 0 trajectory convergence of the coupled solver."""
    td = p.damping_time
    ladder = tuple(s * p.c * td for s in (0.04, 0.02, 0.01))  # 0.08/0.04/0.02
    t_final = 2.5 * td
    probes = np.linspace(t_final / 4.0, t_final, 16)
    report = diagnostics.sigma_convergence(p, ladder, t_final, probes)
    final_err = report.errors[-1]
    tol = 5e-3 * p.c
    passed = report.monotone and final_err < tol
    crit = _criterion(
        "A7", "sigma ladder gives strictly decreasing velocity errors",
        measured=final_err, tolerance=tol, passed=passed,
        detail=report.to_dict(),
    )
    return crit, report


def criterion_a8(p: PhysicalParams) -> tuple:
    """Grid-solver order against the Duhamel oracle on a fixed trajectory."""
    td = p.damping_time
    sigma = 0.04 * p.c * td                                   # 0.08
    ladder = tuple(d * p.c * td for d in (0.008, 0.004, 0.002))  # 0.016/0.008/0.004
    t_final = td
    report = diagnostics.dx_convergence(p, sigma, ladder, t_final)
    order = report.estimated_order
    passed = 1.8 <= order <= 2.2
    crit = _criterion(
        "A8", "field error vs Duhamel oracle converges at second order in dx",
        measured=order, tolerance=0.2, passed=passed,
        detail=report.to_dict(),
    )
    return crit, report


def run_verification(p: PhysicalParams, out_dir=None, render=True) -> dict:
    """Run all criteria; optionally write the JSON report and figures."""
    validate_params(p)
    td = p.damping_time
    criteria = []
    artifacts = {}

    t0 = time.perf_counter()
    criteria.append(criterion_a1(p))
    criteria[-1]["runtime_sec"] = round(time.perf_counter() - t0, 3)

    t0 = time.perf_counter()
    a2, ledger_a2, _ = criterion_a2(p, 5.0 * td)
    a2["runtime_sec"] = round(time.perf_counter() - t0, 3)
    criteria.append(a2)

    t0 = time.perf_counter()
    criteria.append(criterion_a3(p))
    criteria[-1]["runtime_sec"] = round(time.perf_counter() - t0, 3)

    t0 = time.perf_counter()
    a4 = criterion_a4(p, ledger_a2)
    a4["runtime_sec"] = round(time.perf_counter() - t0, 3)
    criteria.append(a4)

    t0 = time.perf_counter()
    a5, reference_run = criterion_a5(p)
    a5["runtime_sec"] = round(time.perf_counter() - t0, 3)
    criteria.append(a5)
    artifacts["reference_run"] = reference_run

    t0 = time.perf_counter()
    criteria.append(criterion_a6(p))
    criteria[-1]["runtime_sec"] = round(time.perf_counter() - t0, 3)

    t0 = time.perf_counter()
    a7, sigma_report = criterion_a7(p)
    a7["runtime_sec"] = round(time.perf_counter() - t0, 3)
    criteria.append(a7)
    artifacts["sigma_report"] = sigma_report

    t0 = time.perf_counter()
    a8, dx_report = criterion_a8(p)
    a8["runtime_sec"] = round(time.perf_counter() - t0, 3)
    criteria.append(a8)
    artifacts["dx_report"] = dx_report

    report = {
        "criteria": criteria,
        "all_pass": all(c["pass"] for c in criteria),
        "params": {"m": p.m, "c": p.c, "beta": p.beta, "v0": p.v0},
    }

    if out_dir is not None:
        from . import output, plots
        from pathlib import Path
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        output.write_json(report, out / "report.json")
        output.write_json(sigma_report.to_dict(), out / "convergence_sigma.json")
        output.write_json(dx_report.to_dict(), out / "convergence_dx.json")
        output.emit_timeseries(reference_run.ledger, reference_run.trajectory,
                               out / "reference_timeseries.csv")
        if render:
            plots.render_convergence(sigma_report, out / "convergence_sigma.png",
                                     "coupled solver: sigma ladder")
            plots.render_convergence(dx_report, out / "convergence_dx.png",
                                     "field solver: dx ladder")
            plots.render_timeseries(reference_run.ledger,
                                    reference_run.trajectory,
                                    out / "reference_timeseries.png",
                                    "reference coupled run")
    return report
