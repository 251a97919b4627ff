"""Time evolution of the model: moment-closure ODEs, a Markovian Monte-Carlo
oracle, and a phase-space PDE solver."""

from .moments import (
    MOMENT_KEYS,
    KernelSchedule,
    MomentState,
    MomentTrajectory,
    evolve_moments,
    kurtosis_trajectory,
    moment_derivative,
)
from .montecarlo import EnsembleMoments, simulate_sde_markov
from .phasespace import (
    HarmonicPotential,
    PhaseSpaceGrid,
    WignerEvolution,
    evolve_wigner_pde,
    grid_moments,
    stable_time_step,
)

__all__ = [
    "MOMENT_KEYS",
    "KernelSchedule",
    "MomentState",
    "MomentTrajectory",
    "evolve_moments",
    "kurtosis_trajectory",
    "moment_derivative",
    "EnsembleMoments",
    "simulate_sde_markov",
    "HarmonicPotential",
    "PhaseSpaceGrid",
    "WignerEvolution",
    "evolve_wigner_pde",
    "grid_moments",
    "stable_time_step",
]
