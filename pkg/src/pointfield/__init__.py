"""1D scalar field coupled to a self-interacting point particle.

Three tiers share one parameter set: closed-form evaluation of the exact
point-source solution (analytic), Gaussian-regularized Duhamel quadrature
for arbitrary trajectories (regularized), and a fully coupled leapfrog /
velocity-Verlet grid solver (fdtd), with energy accounting and convergence
verification on top (diagnostics, verify).
"""

from .analytic import DeltaSolution, position, sample_trajectory, velocity
from .diagnostics import (
    AsymptoticFit,
    ConvergenceReport,
    dx_convergence,
    energy_residual,
    fit_linear_asymptote,
    sigma_convergence,
    tf_uff_gap,
)
from .fdtd import (
    CoupledState,
    FieldState,
    Grid,
    cfl_check,
    coupled_step,
    discrete_energies,
    field_step,
    particle_force,
    run_coupled,
    run_prescribed,
)
from .params import EnergyLedger, EnergySnapshot, PhysicalParams, validate_params
from .regularized import (
    GaussianSource,
    dphi_dt_duhamel,
    dphi_dx_duhamel,
    phi_duhamel,
    source_value,
)
from .trajectory import Trajectory, trajectory_eval

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFit",
    "ConvergenceReport",
    "CoupledState",
    "DeltaSolution",
    "EnergyLedger",
    "EnergySnapshot",
    "FieldState",
    "GaussianSource",
    "Grid",
    "PhysicalParams",
    "Trajectory",
    "cfl_check",
    "coupled_step",
    "discrete_energies",
    "dphi_dt_duhamel",
    "dphi_dx_duhamel",
    "dx_convergence",
    "energy_residual",
    "field_step",
    "fit_linear_asymptote",
    "particle_force",
    "phi_duhamel",
    "position",
    "run_coupled",
    "run_prescribed",
    "sample_trajectory",
    "sigma_convergence",
    "source_value",
    "tf_uff_gap",
    "trajectory_eval",
    "validate_params",
    "velocity",
]
