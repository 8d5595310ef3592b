"""Numerical laboratory for a diffusively scaled kinetic-Poisson fluctuation
system: model collision operators with checkable structural constants, a
Hermite-Fourier exponential integrator, hypocoercive energy machinery, the
low-frequency spectral decomposition of the linearized generator, the limiting
incompressible Navier-Stokes-Fourier-Poisson solver, epsilon-sweep convergence
experiments, and a stochastic-collocation uncertainty layer.
"""

__version__ = "0.1.0"

from .hermite import HermiteBasis, basis_size
from .collision import CollisionModel, FluidProjection, KernelModulation, TransportCoefficients
from .modes import ModeSet
from .kinetic import KineticState, SimulationConfig, Stepper, assemble_generator, poisson_solve
from .energy import (EnergyLedger, LambdaSelection, SelectionInfeasible, energy_functional,
                     fit_decay, measure_constants, select_coefficients)
from .fluid import FluidSolver, FluidState, leray_project, lift_to_kinetic, recover_rho_theta
from .spectrum import (assemble_B, choose_r0, dispersion_roots, eigen_branches,
                       origin_eigenvalues, projections, resolvent_aij, semigroup_split)
from .limits import compare_trajectories, prepare_initial, rate_fit
from .uq import CollocationGrid, ensemble_run, stability_experiment

__all__ = [
    "HermiteBasis", "basis_size", "CollisionModel", "FluidProjection",
    "KernelModulation", "TransportCoefficients", "ModeSet", "KineticState",
    "SimulationConfig", "Stepper", "assemble_generator", "poisson_solve",
    "EnergyLedger", "LambdaSelection", "SelectionInfeasible", "energy_functional",
    "fit_decay", "measure_constants", "select_coefficients", "FluidSolver",
    "FluidState", "leray_project", "lift_to_kinetic", "recover_rho_theta",
    "assemble_B", "choose_r0", "dispersion_roots", "eigen_branches",
    "origin_eigenvalues", "projections", "resolvent_aij", "semigroup_split",
    "compare_trajectories", "prepare_initial", "rate_fit",
    "CollocationGrid", "ensemble_run", "stability_experiment",
]
