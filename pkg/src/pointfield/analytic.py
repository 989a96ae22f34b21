"""Exact delta-limit solution: damped particle motion and the piecewise field.

For a pure point source the particle obeys the separable ODE

    m dv/dt = -(beta^2 / 2c) * v / (c^2 - v^2)

whose solution is given implicitly by

    m [ c^2 ln(v0/v) - (v0^2 - v^2)/2 ] = (beta^2 / 2c) * t.

The field is phi(x,t) = (beta/2c) * tau(x), where tau(x) is the emission
time at which the characteristic through (x, t) meets the particle
worldline; tau vanishes outside the light cone [-ct, ct].  Its spatial
derivative is piecewise

    (beta/2c) / (c + v(tau(x)))      on [-ct, y(t))
   -(beta/2c) / (c - v(tau(x)))      on (y(t), ct]
   -(beta/2c) * v(t) / (c^2 - v^2)   at x = y(t)

and the time derivative is c * phi_x * sign(y(t) - x) away from the kinks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NonConvergence, OutOfRange, UndefinedAtKink
from .params import EnergyLedger, EnergySnapshot, PhysicalParams, validate_params
from .trajectory import Trajectory

# bisection iteration caps; both brackets shrink by 2x per pass
_MAX_BISECT = 200
# trajectory sampling: ~1000 nodes per damping time keeps the cubic Hermite
# interpolation error below 1e-10
_SAMPLES_PER_DAMPING_TIME = 1000


def _implicit_lhs(p: PhysicalParams, logv, v):
    """m [c^2 ln(|v0|/v) - (v0^2 - v^2)/2] with log supplied separately."""
    return p.m * (p.c**2 * (np.log(abs(p.v0)) - logv) - (p.v0**2 - v * v) / 2.0)


def velocity(p: PhysicalParams, t):
    """Particle speed v(t) of the delta-limit solution (vectorized in t).

    Solves the implicit damping relation by bisection in log v on the
    bracket [|v0| exp(-t/t_d - v0^2/2c^2), |v0|], which provably contains
    the root; converges to 1e-13 relative.  The sign of v0 is reattached.
    """
    validate_params(p)
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise OutOfRange("velocity requires t >= 0")
    if p.v0 == 0.0:
        out = np.zeros_like(t)
        return float(out) if scalar else out

    sign = 1.0 if p.v0 > 0.0 else -1.0
    speed0 = abs(p.v0)
    rhs = p.beta**2 / (2.0 * p.c) * t
    lo = np.log(speed0) - t / p.damping_time - p.v0**2 / (2.0 * p.c**2)
    hi = np.full_like(t, np.log(speed0))

    # the bracket holds analytically: g(hi) = -rhs <= 0 and g(lo) = m v^2/2
    # >= 0 by construction of lo; verify with roundoff slack only
    slack = 1e-9 * (p.m * (p.c**2 + p.v0**2) + np.max(rhs))
    g_lo = _implicit_lhs(p, lo, np.exp(lo)) - rhs
    g_hi = _implicit_lhs(p, hi, np.exp(hi)) - rhs
    if np.any(g_lo < -slack) or np.any(g_hi > slack):
        raise NonConvergence("implicit velocity bracket failed")  # internal bug

    # g is strictly decreasing in v, so keep g(lo) >= 0 >= g(hi)
    span = float(np.max(hi - lo))
    n_iter = min(_MAX_BISECT, max(1, int(np.ceil(np.log2(max(span, 1e-16) / 1e-13)))))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        g_mid = _implicit_lhs(p, mid, np.exp(mid)) - rhs
        take_lo = g_mid >= 0.0
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_lo, hi, mid)
    v = sign * np.exp(0.5 * (lo + hi))
    v = np.where(t == 0.0, p.v0, v)
    return float(v) if scalar else v


def position(p: PhysicalParams, t: float) -> float:
    """y(t) = integral of v from 0 to t by adaptive Gauss-Kronrod quadrature."""
    validate_params(p)
    if t < 0.0:
        raise OutOfRange("position requires t >= 0")
    if t == 0.0 or p.v0 == 0.0:
        return 0.0
    val, _ = quad(lambda s: velocity(p, s), 0.0, t,
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def _position_from_velocity(p: PhysicalParams, v):
    """Exact antiderivative of the damping ODE: y as a function of v(t).

    From dt = -(2mc/beta^2) (c^2 - v^2)/v dv and dy = v dt,
    y = (2mc/beta^2) [c^2 (v0 - v) - (v0^3 - v^3)/3].
    """
    k = 2.0 * p.m * p.c / p.beta**2
    return k * (p.c**2 * (p.v0 - v) - (p.v0**3 - v**3) / 3.0)


def sample_trajectory(p: PhysicalParams, horizon: float) -> Trajectory:
    """Dense (t, y, v) samples of the delta-limit motion on [0, horizon]."""
    validate_params(p)
    if horizon < 0.0:
        raise OutOfRange("horizon must be >= 0")
    step = p.damping_time / _SAMPLES_PER_DAMPING_TIME
    n = max(2, int(np.ceil(horizon / step)) + 1) if horizon > 0.0 else 2
    t = np.linspace(0.0, max(horizon, step), n)
    if p.v0 == 0.0:
        return Trajectory(t, np.zeros(n), np.zeros(n))
    v = velocity(p, t)
    y = _position_from_velocity(p, v)
    return Trajectory(t, y, v)


@dataclass(frozen=True)
class DeltaSolution:
    """Precomputed delta-limit solution on [0, horizon].

    Immutable after construction; all evaluation methods are pure and safe
    for concurrent callers.
    """

    params: PhysicalParams
    horizon: float
    traj: Trajectory = field(init=False)

    def __post_init__(self):
        p = validate_params(self.params)
        if p.sigma != 0.0:
            raise ValueError("DeltaSolution is the sigma = 0 limit; "
                             "use params.with_sigma(0.0)")
        object.__setattr__(self, "traj", sample_trajectory(p, self.horizon))

    # -- trajectory ---------------------------------------------------------

    def velocity(self, t):
        return velocity(self.params, t)

    def position(self, t):
        y, _ = self.traj.eval(t)
        return y

    def _check_time(self, t: float) -> float:
        if t < 0.0 or t > self.horizon * (1.0 + 1e-9) + 1e-300:
            raise OutOfRange(f"t = {t} outside [0, {self.horizon}]")
        return min(float(t), self.horizon)

    # -- characteristic-time map ---------------------------------------------

    def tau_of_x(self, x, t: float):
        """Emission time tau(x) at observation time t (vectorized in x).

        For x in [-ct, y(t)] solves x = y(tau) - c(t - tau); for
        x in [y(t), ct] solves x = y(tau) + c(t - tau).  Both branch
        functions are strictly monotone because |v| < c, so bisection on
        [0, t] always brackets.  Returns 0 outside the light cone.
        """
        t = self._check_time(t)
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = self.params.c
        tau = np.zeros_like(x)
        if t > 0.0:
            y_t = self.position(t)
            inside = np.abs(x) < c * t
            at_particle = x == y_t
            tau[at_particle] = t
            todo = inside & ~at_particle
            if np.any(todo):
                xs = x[todo]
                # left branch: g(tau) = y(tau) - c(t-tau) - x, increasing;
                # right branch: g(tau) = y(tau) + c(t-tau) - x, decreasing
                sgn = np.where(xs < y_t, -1.0, 1.0)
                lo = np.zeros_like(xs)
                hi = np.full_like(xs, t)
                y0 = self.traj.positions[0]
                g_lo = y0 + sgn * c * t - xs
                tol = 1e-13 * (1.0 + t)
                n_iter = min(_MAX_BISECT,
                             max(1, int(np.ceil(np.log2(max(t / tol, 2.0))))))
                for _ in range(n_iter):
                    mid = 0.5 * (lo + hi)
                    y_mid, _ = self.traj.eval(mid)
                    g_mid = y_mid + sgn * c * (t - mid) - xs
                    same = np.sign(g_mid) == np.sign(g_lo)
                    lo = np.where(same, mid, lo)
                    hi = np.where(same, hi, mid)
                tau[todo] = 0.5 * (lo + hi)
        return float(tau[0]) if scalar else tau

    # -- field --------------------------------------------------------------

    def phi(self, x, t: float):
        """Field value (beta/2c) * tau(x); supported on [-ct, ct]."""
        beta, c = self.params.beta, self.params.c
        return beta / (2.0 * c) * self.tau_of_x(x, t)

    def dphi_dx(self, x, t: float):
        """Piecewise spatial derivative; the particle point carries the
        midpoint value -(beta/2c) v/(c^2 - v^2), the cone edges 0."""
        t = self._check_time(t)
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = self.params
        c = p.c
        out = np.zeros_like(x)
        if t > 0.0:
            y_t = self.position(t)
            inside = np.abs(x) < c * t
            if np.any(inside):
                xs = x[inside]
                tau = self.tau_of_x(xs, t)
                _, v_tau = self.traj.eval(tau)
                pref = p.beta / (2.0 * c)
                left = pref / (c + v_tau)
                right = -pref / (c - v_tau)
                v_t = v_tau  # at the particle tau == t, so v_tau == v(t)
                mid = -pref * v_t / (c**2 - v_t * v_t)
                vals = np.where(xs < y_t, left, right)
                vals = np.where(xs == y_t, mid, vals)
                out[inside] = vals
        return float(out[0]) if scalar else out

    def dphi_dt(self, x, t: float):
        """c * dphi_dx * sign(y(t) - x); undefined at the three kinks."""
        t = self._check_time(t)
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = self.params.c
        if t > 0.0:
            y_t = self.position(t)
            kinks = (x == y_t) | (x == c * t) | (x == -c * t)
            if np.any(kinks):
                raise UndefinedAtKink(
                    f"dphi_dt has no value at x = {x[kinks][0]} (t = {t})"
                )
            out = c * self.dphi_dx(x, t) * np.sign(y_t - x)
        else:
            out = np.zeros_like(x)
        return float(out[0]) if scalar else out

    # -- energies -------------------------------------------------------------

    def energies(self, t: float) -> EnergySnapshot:
        """Energy constituents at time t.

        U_fp = -(beta^2/2c) t exactly.  U_ff reduces, via the change of
        variables x = y(tau) -+ c(t - tau) on the two branches, to the
        single integral (beta^2 c / 4) * int_0^t dtau / (c^2 - v^2), which
        structurally equals T_f.
        """
        t = self._check_time(t)
        p = self.params
        v_t = velocity(p, t)
        T_p = p.m * v_t * v_t / 2.0
        U_fp = -(p.beta**2 / (2.0 * p.c)) * t
        if t == 0.0:
            U_ff = 0.0
        else:
            integral, _ = quad(
                lambda s: 1.0 / (p.c**2 - velocity(p, s) ** 2),
                0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200,
            )
            U_ff = p.beta**2 * p.c / 4.0 * integral
        return EnergySnapshot(t=t, T_p=T_p, T_f=U_ff, U_ff=U_ff, U_fp=U_fp)

    def energy_ledger(self, times) -> EnergyLedger:
        times = np.asarray(times, dtype=float)
        snaps = [self.energies(t) for t in times]
        return EnergyLedger(
            t=times,
            T_p=np.array([s.T_p for s in snaps]),
            T_f=np.array([s.T_f for s in snaps]),
            U_ff=np.array([s.U_ff for s in snaps]),
            U_fp=np.array([s.U_fp for s in snaps]),
            provenance="analytic",
        )
