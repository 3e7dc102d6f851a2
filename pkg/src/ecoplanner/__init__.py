"""Incentive-based eco-routing toolkit.

Microsimulation of attainable trip outcomes over a small road network,
convex feasible-set construction in (travel time, emissions) space, and
budgeted incentive allocation that trades payments for emission reductions,
with an equal-split baseline for comparison.
"""

from .geometry import FeasibleSet, convex_hull, pareto_front, within_epsilon
from .harness import (
    ScenarioConfig,
    ScenarioError,
    SweepRow,
    bundled_scenario_path,
    emit_csv,
    emit_plot,
    load_scenario,
    prepare,
    run_budget_sweep,
)
from .lp import LinearProgram, LpSolution, solve_lp, vertex_enum_oracle
from .mechanism import (
    IncentiveOffer,
    MechanismResult,
    Participant,
    UserProfile,
    assemble_program,
    baseline_incentives,
    incentive_amount,
    nominal_outcome,
    optimal_incentives,
    predict_compliance,
    settle,
)
from .microsim import (
    DrivingStyle,
    EmissionCoeffs,
    IdmParams,
    OutcomePoint,
    SimulationHorizonError,
    TrafficCondition,
    Trajectory,
    simulate_trip,
)
from .netgraph import Link, Network, NetworkSpecError, Route, build_network, k_shortest_routes
from .prefs import PreferredTimeRangeError, ThetaEstimate, estimate_theta

__version__ = "0.1.0"

__all__ = [
    "DrivingStyle",
    "EmissionCoeffs",
    "FeasibleSet",
    "IdmParams",
    "IncentiveOffer",
    "Link",
    "LinearProgram",
    "LpSolution",
    "MechanismResult",
    "Network",
    "NetworkSpecError",
    "OutcomePoint",
    "Participant",
    "PreferredTimeRangeError",
    "Route",
    "ScenarioConfig",
    "ScenarioError",
    "SimulationHorizonError",
    "SweepRow",
    "ThetaEstimate",
    "TrafficCondition",
    "Trajectory",
    "UserProfile",
    "assemble_program",
    "baseline_incentives",
    "build_network",
    "bundled_scenario_path",
    "convex_hull",
    "emit_csv",
    "emit_plot",
    "estimate_theta",
    "incentive_amount",
    "k_shortest_routes",
    "load_scenario",
    "nominal_outcome",
    "optimal_incentives",
    "pareto_front",
    "predict_compliance",
    "prepare",
    "run_budget_sweep",
    "settle",
    "simulate_trip",
    "solve_lp",
    "vertex_enum_oracle",
    "within_epsilon",
]
