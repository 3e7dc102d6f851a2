"""Incentive allocation over per-user feasible outcome sets.

Each user would privately pick the outcome minimizing their weighted cost
theta.x over their feasible set (the nominal outcome). The planner buys
deviations from that point: an offer recommends an outcome and pays exactly
the user's cost increase. The optimal scheme solves one joint LP that
minimizes total emissions subject to the payment budget; the baseline splits
the budget equally and recommends the eco target to everyone, paying only
those for whom the equal share covers their cost increase.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import FeasibleSet, within_epsilon
from .lp import LinearProgram, solve_lp
from .microsim import OutcomePoint

TOL = 1e-9
# slack accepted when checking recommended points against a hull H-rep
MEMBERSHIP_TOL = 1e-7


def _vec(point) -> np.ndarray:
    if isinstance(point, OutcomePoint):
        return point.vector
    arr = np.asarray(point, dtype=float)
    if arr.shape != (2,):
        raise ValueError("outcome must be a 2-vector or OutcomePoint")
    return arr


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    origin: str
    destination: str
    vehicle: str
    emission_weight: float  # weight on emissions; 1 - weight goes to time

    def __post_init__(self):
        if not 0.0 <= self.emission_weight <= 1.0:
            raise ValueError("emission_weight must be in [0, 1]")

    @property
    def theta(self) -> np.ndarray:
        w = self.emission_weight
        return np.array([1.0 - w, w])


@dataclass(frozen=True)
class Participant:
    """A user joined with their feasible set and solved nominal outcome."""

    profile: UserProfile
    feasible_set: FeasibleSet
    x_nom: OutcomePoint

    @property
    def theta(self) -> np.ndarray:
        return self.profile.theta

    @property
    def x_nom_vec(self) -> np.ndarray:
        return self.x_nom.vector


def nominal_outcome(X: FeasibleSet, theta) -> OutcomePoint:
    """The outcome the user picks unaided: argmin theta.x over X."""
    th = np.asarray(theta, dtype=float)
    if th.shape != (2,) or th.min() < -TOL:
        raise ValueError("theta must be a nonnegative 2-vector")
    sol = solve_lp(LinearProgram(th, X.A, X.b))
    if sol.status != "optimal":
        raise RuntimeError(
            f"nominal LP ended {sol.status}; feasible sets are bounded "
            "nonempty polytopes so this indicates an internal error"
        )
    return OutcomePoint(float(sol.x[0]), float(sol.x[1]))


def make_participant(profile: UserProfile, X: FeasibleSet) -> Participant:
    return Participant(profile, X, nominal_outcome(X, profile.theta))


def incentive_amount(theta, x_rec, x_nom) -> float:
    """Payment that exactly compensates moving from x_nom to x_rec.

    Nonnegative whenever x_nom is the true theta-minimizer; clamped at 0 to
    absorb solver roundoff.
    """
    raw = float(np.asarray(theta, dtype=float) @ (_vec(x_rec) - _vec(x_nom)))
    return raw if raw > 0.0 else 0.0


def compliance_threshold(participant: Participant, target) -> float:
    """Minimum payment a rational user accepts for driving `target`."""
    return incentive_amount(participant.theta, target, participant.x_nom)


@dataclass(frozen=True)
class IncentiveOffer:
    user_id: str
    x_rec: OutcomePoint
    gamma: float
    mechanism: str  # "optimal" | "baseline"
    compliant: bool  # predicted acceptance of this very offer

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.mechanism not in ("optimal", "baseline"):
            raise ValueError(f"unknown mechanism tag {self.mechanism!r}")


@dataclass(frozen=True)
class MechanismResult:
    mechanism: str
    budget: float
    offers: tuple[IncentiveOffer, ...]
    total_spend: float
    predicted_total_emissions_g: float
    predicted_mean_travel_time_s: float

    def __post_init__(self):
        if self.total_spend > self.budget + 1e-6:
            raise ValueError("total spend exceeds budget")


def assemble_program(participants, budget: float) -> LinearProgram:
    """Joint emission-minimization LP over all users' recommended outcomes.

    Variables stack each user's (time, emissions) pair. The first row couples
    users through the payment budget: sum_i theta_i . (x_i - x_nom_i) <= B,
    written with the nominal costs folded into the rhs. The remaining rows
    are each user's hull constraints on its own block.
    """
    participants = list(participants)
    n = len(participants)
    if n == 0:
        raise ValueError("no participants")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    c = np.tile([0.0, 1.0], n)
    budget_row = np.concatenate([p.theta for p in participants])
    rhs0 = budget + sum(float(p.theta @ p.x_nom_vec) for p in participants)
    n_rows = 1 + sum(p.feasible_set.A.shape[0] for p in participants)
    A = np.zeros((n_rows, 2 * n))
    b = np.empty(n_rows)
    A[0] = budget_row
    b[0] = rhs0
    r = 1
    for i, p in enumerate(participants):
        k = p.feasible_set.A.shape[0]
        A[r : r + k, 2 * i : 2 * i + 2] = p.feasible_set.A
        b[r : r + k] = p.feasible_set.b
        r += k
    return LinearProgram(c, A, b)


def _check_membership(participant: Participant, point: OutcomePoint) -> None:
    if not participant.feasible_set.contains(point.vector, tol=MEMBERSHIP_TOL):
        raise RuntimeError(
            f"recommended outcome for {participant.profile.user_id} "
            "left the feasible set; internal error"
        )


def optimal_incentives(participants, budget: float) -> MechanismResult:
    """Budget-constrained emission-optimal offers via one joint LP solve."""
    participants = list(participants)
    lp = assemble_program(participants, budget)
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise RuntimeError(
            f"incentive LP ended {sol.status}; recommending every nominal "
            "outcome is always feasible so this indicates an internal error"
        )
    offers = []
    spend = 0.0
    for i, p in enumerate(participants):
        x_rec = OutcomePoint(float(sol.x[2 * i]), float(sol.x[2 * i + 1]))
        _check_membership(p, x_rec)
        gamma = incentive_amount(p.theta, x_rec, p.x_nom)
        spend += gamma
        offers.append(
            IncentiveOffer(p.profile.user_id, x_rec, gamma, "optimal", True)
        )
    return MechanismResult(
        mechanism="optimal",
        budget=budget,
        offers=tuple(offers),
        total_spend=spend,
        predicted_total_emissions_g=sum(o.x_rec.emissions_g for o in offers),
        predicted_mean_travel_time_s=(
            sum(o.x_rec.travel_time_s for o in offers) / len(offers)
        ),
    )


def baseline_incentives(
    participants, budget: float, eco_recommendations
) -> MechanismResult:
    """Equal split of the budget, conditional on driving the eco target.

    eco_recommendations aligns with participants (least-travel-time point of
    the eco route's share of each user's outcomes). A user complies when the
    equal share covers their cost increase; non-compliant users keep their
    nominal outcome and their share is withheld, so realized spend can fall
    short of the budget.
    """
    participants = list(participants)
    eco_recommendations = list(eco_recommendations)
    n = len(participants)
    if n == 0:
        raise ValueError("no participants")
    if len(eco_recommendations) != n:
        raise ValueError("one eco recommendation per participant required")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    share = budget / n
    offers = []
    spend = 0.0
    pred_e = 0.0
    pred_t = 0.0
    for p, rec in zip(participants, eco_recommendations):
        _check_membership(p, rec)
        threshold = compliance_threshold(p, rec)
        ok = share >= threshold - TOL
        offers.append(
            IncentiveOffer(p.profile.user_id, rec, share, "baseline", ok)
        )
        if ok:
            spend += share
            pred_e += rec.emissions_g
            pred_t += rec.travel_time_s
        else:
            pred_e += p.x_nom.emissions_g
            pred_t += p.x_nom.travel_time_s
    return MechanismResult(
        mechanism="baseline",
        budget=budget,
        offers=tuple(offers),
        total_spend=spend,
        predicted_total_emissions_g=pred_e,
        predicted_mean_travel_time_s=pred_t / n,
    )


def predict_compliance(offer: IncentiveOffer, participant: Participant) -> bool:
    """Rational cost-minimizer accepts iff the payment covers the cost
    increase of the recommendation (closed inequality)."""
    threshold = compliance_threshold(participant, offer.x_rec)
    return offer.gamma >= threshold - TOL


def settle(offer: IncentiveOffer, actual, epsilon: float) -> float:
    """Pay the offer iff the realized outcome landed within the closed
    epsilon-ball around the recommendation."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if within_epsilon(_vec(actual), offer.x_rec.vector, epsilon):
        return offer.gamma
    return 0.0


def result_rows(result: MechanismResult, participants) -> list[dict]:
    rows = []
    for offer, p in zip(result.offers, participants):
        rows.append(
            {
                "id": offer.user_id,
                "emission_weight": p.profile.emission_weight,
                "x_nom_t": p.x_nom.travel_time_s,
                "x_nom_e": p.x_nom.emissions_g,
                "x_rec_t": offer.x_rec.travel_time_s,
                "x_rec_e": offer.x_rec.emissions_g,
                "gamma": offer.gamma,
                "compliant": offer.compliant,
            }
        )
    return rows


def write_result_csv(result: MechanismResult, participants, path) -> None:
    rows = result_rows(result, participants)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
