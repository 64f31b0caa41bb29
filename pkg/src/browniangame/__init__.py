"""Solver library for coordination games on a Brownian outcome function.

Exact Gaussian payoff evaluation, best responses with endogenous kinks,
equilibrium verification/enumeration via followership matrices, nonsmooth
potential maximization, and the two-division organization application with
its decentralization threshold.
"""

__version__ = "0.1.0"

from .best_response import BestResponseResult, best_response, br_grid_oracle, policy_upper_bound
from .equilibrium import (
    BenchmarkProfiles,
    ConformityReport,
    EquilibriumCheck,
    EquilibriumReport,
    TieSegment,
    benchmark_profiles,
    conformity_gaps,
    enumerate_equilibria,
    extremal_equilibria,
    multiplicity_diagnostics,
    verify_equilibrium,
)
from .errors import ConvergenceError, GameError, SolverError, ValidationError
from .game import (
    DEFAULT_TOL,
    DerivedQuantities,
    NetworkGame,
    OutcomeMoments,
    build_game,
    expected_outcomes,
    exploration_load,
    followership_consistent,
    followership_roles,
    followership_skew_complementary,
    outcome_moments,
    policy_for_outcome,
    validate_profile,
)
from .oracle import McEstimate, mc_payoff, mc_potential, sample_outcomes
from .organization import (
    OrgReport,
    OrgSpec,
    ThresholdResult,
    build_org,
    build_org_report,
    decentralization_threshold,
    expected_profit,
    mc_profit,
    org_to_game,
    profit_maximizer,
    sweep_sigma,
)
from .payoff import (
    CovKernel,
    IdCheckResult,
    Kink,
    PayoffBreakdown,
    brownian_min_kernel,
    expected_utility,
    increasing_differences_check,
    own_policy_utilities,
    payoff_breakdown,
    payoff_kinks,
    polynomial_integral_kernel,
    potential_value,
    squared_exponential_kernel,
)
from .potential import PotentialResult, maximize_potential, potential_grid_oracle

__all__ = [name for name in dir() if not name.startswith("_")]
