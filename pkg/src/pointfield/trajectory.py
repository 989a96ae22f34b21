"""Queryable particle path y(tau), v(tau) on [0, T].

Stores (time, position, velocity) samples and interpolates with cubic
Hermite polynomials built from the (y, v) pairs, so the interpolated
position is C^1 and its derivative matches the stored velocities exactly
at the nodes.  That consistency is what the characteristic-crossing
root-finder relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange

# relative slack for endpoint comparisons, absorbs float dust like N*dt > T
_EDGE_RTOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=float)
        y = np.ascontiguousarray(self.positions, dtype=float)
        v = np.ascontiguousarray(self.velocities, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("trajectory needs at least two samples")
        if y.shape != t.shape or v.shape != t.shape:
            raise ValueError("times, positions and velocities must align")
        if t[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        for arr in (t, y, v):
            arr.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", y)
        object.__setattr__(self, "velocities", v)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def _clamp(self, tau):
        tau = np.asarray(tau, dtype=float)
        T = self.horizon
        slack = _EDGE_RTOL * (1.0 + T)
        if np.any(tau < -slack) or np.any(tau > T + slack):
            bad = tau[(tau < -slack) | (tau > T + slack)]
            raise OutOfRange(f"tau = {np.atleast_1d(bad)[0]} outside [0, {T}]")
        return np.clip(tau, 0.0, T)

    def eval(self, tau):
        """Hermite-interpolated (position, velocity) at tau (scalar or array)."""
        scalar = np.isscalar(tau) or np.ndim(tau) == 0
        tau = self._clamp(tau)
        t, y, v = self.times, self.positions, self.velocities
        i = np.clip(np.searchsorted(t, tau, side="right") - 1, 0, t.size - 2)
        h = t[i + 1] - t[i]
        u = (tau - t[i]) / h
        # cubic Hermite basis and its derivative
        h00 = (1.0 + 2.0 * u) * (1.0 - u) ** 2
        h10 = u * (1.0 - u) ** 2
        h01 = u * u * (3.0 - 2.0 * u)
        h11 = u * u * (u - 1.0)
        yy = h00 * y[i] + h10 * h * v[i] + h01 * y[i + 1] + h11 * h * v[i + 1]
        d00 = 6.0 * u * (u - 1.0)
        d10 = (1.0 - u) * (1.0 - 3.0 * u)
        d01 = -d00
        d11 = u * (3.0 * u - 2.0)
        vv = d00 * y[i] / h + d10 * v[i] + d01 * y[i + 1] / h + d11 * v[i + 1]
        # exact node values, not the roundoff of the basis combination
        on_node = u == 0.0
        if np.any(on_node):
            yy = np.where(on_node, y[i], yy)
            vv = np.where(on_node, v[i], vv)
        if scalar:
            return float(yy), float(vv)
        return yy, vv

    def position(self, tau):
        return self.eval(tau)[0]

    def velocity(self, tau):
        return self.eval(tau)[1]

    def max_speed(self) -> float:
        return float(np.max(np.abs(self.velocities)))


def trajectory_eval(traj: Trajectory, tau):
    """Functional alias for :meth:`Trajectory.eval`."""
    return traj.eval(tau)
