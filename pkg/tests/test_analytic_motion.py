"""Particle-motion oracle tests: RK4 on the damping ODE, quadrature and the
exact antiderivative of the separable ODE."""

import math

import numpy as np
import pytest

from pointfield import PhysicalParams, position, sample_trajectory, velocity
from pointfield.errors import OutOfRange

# value computed once with the RK4 oracle below (dt = 1e-5)
V_AT_2_REF = 0.16453849527121686


def rk4_velocity(p, t_end, dt=1e-5):
    """Independent oracle: classic RK4 on m dv/dt = -(b^2/2c) v/(c^2-v^2)."""
    def f(v):
        return -(p.beta**2 / (2.0 * p.m * p.c)) * v / (p.c**2 - v * v)

    v = p.v0
    for _ in range(int(round(t_end / dt))):
        k1 = f(v)
        k2 = f(v + 0.5 * dt * k1)
        k3 = f(v + 0.5 * dt * k2)
        k4 = f(v + dt * k3)
        v += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def terminal_position(p):
    """Exact limit of y(t): (2mc/beta^2) (c^2 v0 - v0^3/3)."""
    return 2.0 * p.m * p.c / p.beta**2 * (p.c**2 * p.v0 - p.v0**3 / 3.0)


def test_velocity_initial_condition(ref):
    assert velocity(ref, 0.0) == ref.v0


def test_velocity_zero_initial_velocity_stays_zero():
    p = PhysicalParams(v0=0.0)
    assert velocity(p, 0.0) == 0.0
    assert velocity(p, 7.3) == 0.0


def test_velocity_matches_rk4_oracle(ref):
    v_impl = velocity(ref, 2.0)
    assert abs(v_impl - V_AT_2_REF) < 1e-9
    v_rk4 = rk4_velocity(ref, 2.0)
    assert abs(v_impl - v_rk4) < 1e-9


def test_velocity_large_time_prefactor(ref):
    # linearizing the ODE gives the rate beta^2/(2mc^3); the prefactor the
    # full nonlinear history leaves behind is exp(-v0^2/2c^2), which the
    # implicit relation yields directly as v -> 0
    t = 20.0 * ref.damping_time
    ratio = velocity(ref, t) / (ref.v0 * math.exp(-t / ref.damping_time))
    assert abs(ratio - math.exp(-ref.v0**2 / (2 * ref.c**2))) < 1e-9


def test_velocity_negative_v0_mirrors_positive(ref):
    p_neg = PhysicalParams(v0=-0.5)
    ts = np.array([0.3, 1.7, 4.0])
    assert np.allclose(velocity(p_neg, ts), -velocity(ref, ts), rtol=0, atol=1e-16)


def test_velocity_rejects_negative_time(ref):
    with pytest.raises(OutOfRange):
        velocity(ref, -1.0)


def test_implicit_relation_residual_random_draws(rng):
    # |m[c^2 ln(v0/v) - (v0^2-v^2)/2] - (beta^2/2c) t| < 1e-10 (1 + t)
    for _ in range(1000):
        m = rng.uniform(0.1, 10.0)
        c = rng.uniform(0.2, 5.0)
        beta = rng.choice([-1, 1]) * rng.uniform(0.2, 3.0)
        v0 = rng.uniform(0.01, 0.95) * c * rng.choice([-1, 1])
        p = PhysicalParams(m=m, c=c, beta=beta, v0=v0, sigma=0.0)
        # keep t within a representable number of e-foldings
        t = rng.uniform(0.0, min(20.0, 30.0 * p.damping_time))
        v = velocity(p, t)
        lhs = m * (c**2 * math.log(abs(v0 / v)) - (v0**2 - v**2) / 2.0)
        assert abs(lhs - beta**2 / (2 * c) * t) < 1e-10 * (1.0 + t)


def test_velocity_underflows_to_zero_far_beyond_damping():
    # hundreds of thousands of e-foldings: the true value is below the
    # smallest double, and 0.0 is the honest answer
    p = PhysicalParams(m=0.1, c=0.2, beta=3.0, v0=0.1)
    assert p.damping_time < 1e-3
    assert velocity(p, 100.0) == 0.0


def test_monotone_damping_and_sign_preservation(rng):
    for _ in range(50):
        v0 = rng.uniform(0.05, 0.9) * rng.choice([-1, 1])
        p = PhysicalParams(v0=v0)
        ts = np.sort(rng.uniform(0.0, 15.0, size=8))
        vs = velocity(p, ts)
        assert np.all(np.sign(vs) == np.sign(v0))
        assert np.all(np.diff(np.abs(vs)) < 0)


def test_position_initial_and_fixed_point(ref):
    assert position(ref, 0.0) == 0.0
    assert position(PhysicalParams(v0=0.0), 5.0) == 0.0


def test_position_quadrature_matches_exact_antiderivative(ref):
    # the separable ODE integrates in closed form; quadrature must agree
    v3 = velocity(ref, 3.0)
    y3_exact = 2.0 / 1.0 * (ref.v0 - v3 - (ref.v0**3 - v3**3) / 3.0)
    assert abs(position(ref, 3.0) - y3_exact) < 1e-10


def test_position_approaches_finite_limit(ref):
    # y(inf) = 11/12 for the reference parameters; exponential decay makes
    # the tail beyond 20 damping times smaller than v(T) * t_d
    T = 20.0 * ref.damping_time
    y_T = position(ref, T)
    tail = velocity(ref, T) * ref.damping_time
    assert tail < 1e-8
    assert abs(y_T - terminal_position(ref)) < tail + 1e-9
    assert abs(terminal_position(ref) - 11.0 / 12.0) < 1e-15


def test_sampled_trajectory_matches_position_quadrature(ref, rng):
    traj = sample_trajectory(ref, horizon=6.0)
    for t in rng.uniform(0.0, 6.0, size=5):
        y_interp, v_interp = traj.eval(t)
        assert abs(y_interp - position(ref, float(t))) < 1e-10
        assert abs(v_interp - velocity(ref, float(t))) < 1e-10


def test_sampled_trajectory_subluminal_probe(ref):
    traj = sample_trajectory(ref, horizon=8.0)
    probe = np.linspace(0.0, 8.0, 2000)
    _, v = traj.eval(probe)
    assert np.max(np.abs(v)) < ref.c
