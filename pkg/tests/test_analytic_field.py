"""Characteristic-time map and piecewise field of the delta-limit solution.

The residual of the defining characteristic equation is the oracle for
tau(x); finite differences of phi are the oracle for its derivatives.
"""

import numpy as np
import pytest

from pointfield import DeltaSolution, PhysicalParams
from pointfield.errors import OutOfRange, UndefinedAtKink


@pytest.fixture(scope="module")
def sol():
    return DeltaSolution(PhysicalParams(v0=0.5), horizon=5.0)


@pytest.fixture(scope="module")
def static():
    return DeltaSolution(PhysicalParams(v0=0.0), horizon=5.0)


def test_tau_at_particle_equals_t(sol):
    t = 1.0
    assert sol.tau_of_x(sol.position(t), t) == t


def test_tau_at_cone_edges_is_zero(sol):
    t = 1.0
    assert sol.tau_of_x(1.0, t) == 0.0
    assert sol.tau_of_x(-1.0, t) == 0.0
    assert sol.tau_of_x(1.7, t) == 0.0  # outside the cone


def test_tau_static_closed_form(static):
    # resting particle: tau(x) = t - |x|/c on the cone
    t = 2.0
    xs = np.linspace(-1.9, 1.9, 21)
    tau = static.tau_of_x(xs, t)
    assert np.max(np.abs(tau - (t - np.abs(xs)))) < 1e-12


def test_tau_residual_is_small(sol, rng):
    # oracle: the returned tau satisfies its own defining equation
    t = 1.0
    y_t = sol.position(t)
    for x in rng.uniform(-0.99, 0.99, size=40):
        tau = sol.tau_of_x(float(x), t)
        y_tau = sol.position(tau) if tau <= t else None
        sgn = -1.0 if x < y_t else 1.0
        resid = y_tau + sgn * sol.params.c * (t - tau) - x
        assert abs(resid) < 1e-12


def test_tau_continuity_across_particle(sol):
    t = 1.5
    y_t = sol.position(t)
    eps = 1e-9
    left = sol.tau_of_x(y_t - eps, t)
    right = sol.tau_of_x(y_t + eps, t)
    assert abs(left - t) < 1e-7 and abs(right - t) < 1e-7


def test_tau_maximum_at_particle(sol):
    t = 2.0
    xs = np.linspace(-2.0, 2.0, 801)
    tau = sol.tau_of_x(xs, t)
    assert np.max(tau) <= t
    assert sol.tau_of_x(sol.position(t), t) == t


def test_phi_support_and_peak(sol):
    t = 1.0
    assert sol.phi(1.2, t) == 0.0
    assert sol.phi(-3.0, t) == 0.0
    p = sol.params
    assert sol.phi(sol.position(t), t) == pytest.approx(
        p.beta / (2 * p.c) * t, abs=1e-15)


def test_phi_static_triangle(static):
    # v0 = 0, beta = c = 1: phi(x,t) = (t - |x|)/2 on [-t, t]
    t = 1.0
    xs = np.linspace(-0.99, 0.99, 41)
    assert np.max(np.abs(static.phi(xs, t) - (t - np.abs(xs)) / 2)) < 1e-12


def test_phi_at_t_zero(sol):
    assert sol.phi(0.0, 0.0) == 0.0


def test_dphi_dx_static_values(static):
    # resting particle: -1/2 on (0, t], +1/2 on [-t, 0), 0 at the particle
    t = 1.0
    assert static.dphi_dx(0.5, t) == pytest.approx(-0.5, abs=1e-12)
    assert static.dphi_dx(-0.5, t) == pytest.approx(0.5, abs=1e-12)
    assert static.dphi_dx(0.0, t) == 0.0  # midpoint value with v = 0


def test_dphi_dx_outside_and_edges(sol):
    t = 1.0
    assert sol.dphi_dx(1.0, t) == 0.0   # cone edge carries 0
    assert sol.dphi_dx(-1.0, t) == 0.0
    assert sol.dphi_dx(5.0, t) == 0.0


def test_dphi_dx_particle_midpoint_value(sol):
    t = 1.0
    p = sol.params
    v_t = sol.velocity(t)
    expect = -(p.beta / (2 * p.c)) * v_t / (p.c**2 - v_t**2)
    assert sol.dphi_dx(sol.position(t), t) == pytest.approx(expect, rel=1e-12)


def test_dphi_dx_matches_centered_difference_of_phi(sol, rng):
    # finite-difference oracle away from kinks; h large enough that the
    # tau root-finder tolerance (1e-13 scale) does not dominate the quotient
    t = 1.2
    y_t = sol.position(t)
    h = 1e-4
    for x in rng.uniform(-1.1, 1.1, size=30):
        x = float(x)
        if min(abs(x - y_t), abs(x - t), abs(x + t)) < 10 * h:
            continue
        fd = (sol.phi(x + h, t) - sol.phi(x - h, t)) / (2 * h)
        assert abs(fd - sol.dphi_dx(x, t)) < 1e-7


def test_gradient_bound(sol):
    # sup |dphi_dx| <= (beta/2c)/(c - |v0|)
    t = 3.0
    xs = np.linspace(-2.99, 2.99, 2001)
    p = sol.params
    bound = (p.beta / (2 * p.c)) / (p.c - abs(p.v0))
    assert np.max(np.abs(sol.dphi_dx(xs, t))) <= bound + 1e-15


def test_dphi_dt_static_value_and_identity(static, sol):
    t = 1.0
    assert static.dphi_dt(0.5, t) == pytest.approx(0.5, abs=1e-12)
    xs = np.array([-0.7, -0.2, 0.6, 0.9])
    lhs = sol.dphi_dt(xs, t) ** 2
    rhs = sol.params.c**2 * sol.dphi_dx(xs, t) ** 2
    assert np.allclose(lhs, rhs, rtol=1e-14, atol=0)


def test_dphi_dt_positive_inside_cone(sol):
    t = 2.0
    xs = np.linspace(-1.95, 1.95, 101)
    y_t = sol.position(t)
    xs = xs[np.abs(xs - y_t) > 1e-3]
    assert np.all(sol.dphi_dt(xs, t) > 0.0)


def test_dphi_dt_matches_time_difference_of_phi(sol):
    # centered time-difference oracle at fixed x
    x, t = 0.3, 1.5
    h = 1e-4
    fd = (sol.phi(x, t + h) - sol.phi(x, t - h)) / (2 * h)
    assert abs(fd - sol.dphi_dt(x, t)) < 1e-7


def test_dphi_dt_undefined_at_kinks(sol):
    t = 1.0
    for x in (sol.position(t), t, -t):
        with pytest.raises(UndefinedAtKink):
            sol.dphi_dt(x, t)


def test_time_bounds_checked(sol):
    with pytest.raises(OutOfRange):
        sol.phi(0.0, -0.5)
    with pytest.raises(OutOfRange):
        sol.phi(0.0, 99.0)


def test_requires_zero_sigma():
    with pytest.raises(ValueError):
        DeltaSolution(PhysicalParams(v0=0.5, sigma=0.1), horizon=1.0)
