"""Trade-off weight estimation from a reported preferred travel time.

A user who reports the travel time they would choose unaided pins down a
point on the Pareto front of their feasible set. Grid search over the
emission weight finds the nominal outcome closest to that point, then
re-grids around the winner to refine. A front vertex is optimal for a whole
interval of weights, so the weight is only identified up to that interval;
ties resolve toward the middle of the tied grid range to return a stable
interior representative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import FeasibleSet
from .mechanism import nominal_outcome
from .microsim import OutcomePoint

_TIE_TOL = 1e-12


class PreferredTimeRangeError(ValueError):
    """Reported time is not achievable on the Pareto front."""

    def __init__(self, t_report: float, t_min: float, t_max: float):
        self.t_report = t_report
        self.t_min = t_min
        self.t_max = t_max
        super().__init__(
            f"preferred travel time {t_report:g}s outside the achievable "
            f"range [{t_min:g}, {t_max:g}]"
        )


@dataclass(frozen=True)
class ThetaEstimate:
    emission_weight: float
    theta: np.ndarray
    matched: OutcomePoint  # nominal outcome under the estimated weight
    residual: float  # distance from matched to the reported-time front point
    residual_history: tuple[float, ...]  # best residual after each round


def pareto_point_for_time(X: FeasibleSet, t_report: float) -> OutcomePoint:
    """The unique Pareto-front point with the given travel time, linearly
    interpolated along the front chain. Raises PreferredTimeRangeError with
    the achievable interval when t_report falls outside it."""
    chain = X.pareto
    t_min = float(chain[0, 0])
    t_max = float(chain[-1, 0])
    if not (t_min - 1e-9 <= t_report <= t_max + 1e-9):
        raise PreferredTimeRangeError(t_report, t_min, t_max)
    t = min(max(t_report, t_min), t_max)
    e = float(np.interp(t, chain[:, 0], chain[:, 1]))
    return OutcomePoint(t, e)


def estimate_theta(
    X: FeasibleSet,
    t_report: float,
    s: int = 101,
    refinements: int = 2,
) -> ThetaEstimate:
    """Grid-search the emission weight whose nominal outcome best matches
    the reported preferred travel time.

    Each round evaluates an s-point uniform grid over the current interval
    (starting from [0, 1]), picks the weight whose nominal outcome is
    Euclidean-closest to the front point at t_report, then narrows to the
    winner's neighboring grid cells. The refinement window always contains
    the previous winner, so the best residual never increases.
    """
    if s < 2:
        raise ValueError("grid size s must be >= 2")
    if refinements < 0:
        raise ValueError("refinements must be >= 0")
    target = pareto_point_for_time(X, t_report).vector

    lo, hi = 0.0, 1.0
    history = []
    best_w = 0.0
    best_point = None
    for _ in range(refinements + 1):
        grid = np.linspace(lo, hi, s)
        points = [nominal_outcome(X, np.array([1.0 - w, w])) for w in grid]
        dist = np.array([np.linalg.norm(p.vector - target) for p in points])
        d_min = float(dist.min())
        tied = np.flatnonzero(dist <= d_min + _TIE_TOL)
        mid = 0.5 * (grid[tied[0]] + grid[tied[-1]])
        s_star = int(tied[np.argmin(np.abs(grid[tied] - mid))])
        best_w = float(grid[s_star])
        best_point = points[s_star]
        history.append(float(dist[s_star]))
        lo = float(grid[max(s_star - 1, 0)])
        hi = float(grid[min(s_star + 1, s - 1)])

    return ThetaEstimate(
        emission_weight=best_w,
        theta=np.array([1.0 - best_w, best_w]),
        matched=best_point,
        residual=history[-1],
        residual_history=tuple(history),
    )
