"""Steered quantum annealing: guess-biased initial Hamiltonians, spectral
gaps, adiabatic schedules, finite-time dynamics and perturbative overlaps."""

from .anneal import (
    AnnealPath,
    DivergentScheduleError,
    adiabatic_time_profile,
    gap_improvement_ratio,
    optimal_schedule,
    spectrum_trace,
    total_adiabatic_time,
)
from .dynamics import evolve, probability_improvement_ratio
from .models import (
    GenerationError,
    IsingInstance,
    SatInstance,
    derive_seed,
    gen_ising,
    gen_unique_3sat,
    ising_hamiltonian,
    sat_hamiltonian,
)
from .steering import highest_field_guess, omega, rotated_initial_hamiltonian, theta_vector

__version__ = "0.1.0"
