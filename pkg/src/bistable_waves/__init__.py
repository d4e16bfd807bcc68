"""Traveling waves of a bistable reaction-diffusion equation with a jump
nonlinearity: hypothesis audits, envelope speed brackets, phase-plane
shooting for the C^1 wave, and desk-scale stability experiments."""

from . import errors
from .linear_theory import (
    EigenRates,
    EnvelopeWave,
    SpeedBracket,
    derivative_gap,
    eigen_rates,
    envelope_profile,
    lambda0_plus,
    lambda1_minus,
    match_speed,
    matched_wave,
    speed_bracket,
    speed_residual,
)
from .reaction import (
    BranchPoly,
    HypothesisReport,
    ReactionTerm,
    SlopeBounds,
    check_hypotheses,
    envelope,
    piecewise_linear,
    potential_integral,
    quadratic_demo,
    slope_bounds,
)
from .shooting import (
    PhasePath,
    WaveSolution,
    find_speed,
    reconstruct_profile,
    shoot_half,
    solve_wave,
    speed_mismatch,
    verify_c1,
)
from .simulator import (
    ComparisonReport,
    Grid1D,
    SimState,
    SuperSubParams,
    Trajectory,
    WaveProfile,
    comparison_check,
    envelope_value,
    estimate_speed,
    fit_decay,
    front_crossings,
    front_position,
    heat_kernel_eps,
    reaction_ode,
    run,
    shift_distance,
    step,
    supersub_params,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPoly",
    "ComparisonReport",
    "EigenRates",
    "EnvelopeWave",
    "Grid1D",
    "HypothesisReport",
    "PhasePath",
    "ReactionTerm",
    "SimState",
    "SlopeBounds",
    "SpeedBracket",
    "SuperSubParams",
    "Trajectory",
    "WaveProfile",
    "WaveSolution",
    "check_hypotheses",
    "comparison_check",
    "derivative_gap",
    "eigen_rates",
    "envelope",
    "envelope_profile",
    "envelope_value",
    "errors",
    "estimate_speed",
    "find_speed",
    "fit_decay",
    "front_crossings",
    "front_position",
    "heat_kernel_eps",
    "lambda0_plus",
    "lambda1_minus",
    "match_speed",
    "matched_wave",
    "piecewise_linear",
    "potential_integral",
    "quadratic_demo",
    "reaction_ode",
    "reconstruct_profile",
    "run",
    "shift_distance",
    "shoot_half",
    "slope_bounds",
    "solve_wave",
    "speed_bracket",
    "speed_mismatch",
    "speed_residual",
    "step",
    "supersub_params",
    "verify_c1",
]
