"""Hermite-spectral, positive-step high-order splitting for the 2D Gross-Pitaevskii equation."""
from .dynamics import DiagnosticsRecord, EvolutionConfig, evolve, measure_period
from .flows import FlowRegime, ModelParams, linear_flow, make_subflows, nonlinear_flow
from .ground_state import GroundStateConfig, GroundStateResult, descend, phase_fix, refine_tau
from .hermite import (
    SpectralBasis,
    basis_function,
    build_basis,
    build_rule,
    chemical_potential,
    forward,
    hamiltonian,
    inverse,
    mass_norm,
)
from .splitting import SplittingScheme, build_scheme, composite_step

__version__ = "0.1.0"
