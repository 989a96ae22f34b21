"""Physical parameters and energy bookkeeping types shared by every tier.

The model couples a 1D scalar wave field (speed c) to a point particle of
mass m through a coupling constant beta.  The particle starts at the origin
with velocity v0; the field starts at rest.  sigma is the width of the
Gaussian regularization of the point source (sigma = 0 means the exact
delta-function limit, served by the analytic tier only).

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    NegativeSigma,
    NonPositiveMass,
    NonPositiveSpeed,
    SuperluminalInitialVelocity,
    ZeroCoupling,
)


@dataclass(frozen=True)
class PhysicalParams:
    """The constants (m, c, beta, v0) plus the regularization width sigma.

    Single source of truth for every tier; defaults are the unit system
    m = c = beta = 1.
    """

    m: float = 1.0
    c: float = 1.0
    beta: float = 1.0
    v0: float = 0.0
    sigma: float = 0.0

    @property
    def damping_time(self) -> float:
        """e-folding time 2*m*c^3/beta^2 of the particle velocity."""
        return 2.0 * self.m * self.c**3 / self.beta**2

    def with_sigma(self, sigma: float) -> "PhysicalParams":
        return replace(self, sigma=sigma)


def validate_params(p: PhysicalParams) -> PhysicalParams:
    """Return ``p`` unchanged iff all invariants hold, else raise.

    Requires m > 0, c > 0, beta != 0, |v0| < c and sigma >= 0.  The strict
    |v0| < c bound is what guarantees a globally damped solution; beta = 0
    is rejected because the model degenerates and callers wanting a free
    particle should not use this package.
    """
    if not (p.m > 0.0) or not np.isfinite(p.m):
        raise NonPositiveMass(f"mass must be positive, got m = {p.m}")
    if not (p.c > 0.0) or not np.isfinite(p.c):
        raise NonPositiveSpeed(f"wave speed must be positive, got c = {p.c}")
    if p.beta == 0.0 or not np.isfinite(p.beta):
        raise ZeroCoupling(f"coupling must be nonzero and finite, got beta = {p.beta}")
    if not (abs(p.v0) < p.c):
        raise SuperluminalInitialVelocity(
            f"|v0| = {abs(p.v0)} must be strictly below c = {p.c}"
        )
    if p.sigma < 0.0 or not np.isfinite(p.sigma):
        raise NegativeSigma(f"regularization width must be >= 0, got sigma = {p.sigma}")
    return p


@dataclass(frozen=True)
class EnergySnapshot:
    """Energy constituents at one instant.

    T_p: particle kinetic, T_f: field kinetic, U_ff: field self-energy,
    U_fp: field-particle interaction.  H is always the recomputed sum of
    the four, never stored independently.
    """

    t: float
    T_p: float
    T_f: float
    U_ff: float
    U_fp: float

    def __post_init__(self):
        if self.T_p < 0.0 or self.T_f < 0.0 or self.U_ff < 0.0:
            raise ValueError(
                f"kinetic and self energies must be nonnegative, got "
                f"T_p={self.T_p}, T_f={self.T_f}, U_ff={self.U_ff}"
            )

    @property
    def H(self) -> float:
        return self.T_p + self.T_f + self.U_ff + self.U_fp


@dataclass(frozen=True)
class EnergyLedger:
    """Time series of the energy constituents with provenance.

    ``provenance`` records how the numbers were produced: "analytic"
    (closed forms plus quadrature), "quadrature" (Duhamel integrals) or
    "discrete" (grid sums from the coupled solver).
    """

    t: np.ndarray
    T_p: np.ndarray
    T_f: np.ndarray
    U_ff: np.ndarray
    U_fp: np.ndarray
    provenance: str = "analytic"

    def __post_init__(self):
        for name in ("t", "T_p", "T_f", "U_ff", "U_fp"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = self.t.size
        if any(getattr(self, k).size != n for k in ("T_p", "T_f", "U_ff", "U_fp")):
            raise ValueError("ledger columns must have equal length")

    @property
    def H(self) -> np.ndarray:
        return self.T_p + self.T_f + self.U_ff + self.U_fp

    def __len__(self) -> int:
        return self.t.size

    def column(self, name: str) -> np.ndarray:
        if name not in ("T_p", "T_f", "U_ff", "U_fp", "H"):
            raise KeyError(f"unknown ledger column {name!r}")
        return getattr(self, name)

    def snapshot(self, i: int) -> EnergySnapshot:
        return EnergySnapshot(
            t=float(self.t[i]),
            T_p=float(self.T_p[i]),
            T_f=float(self.T_f[i]),
            U_ff=float(self.U_ff[i]),
            U_fp=float(self.U_fp[i]),
        )
