import numpy as np
import pytest

from ecoplanner.geometry import FeasibleSet
from ecoplanner.mechanism import nominal_outcome
from ecoplanner.prefs import (
    PreferredTimeRangeError,
    estimate_theta,
    pareto_point_for_time,
)

CHAIN3 = FeasibleSet.from_points([(10.0, 5.0), (12.0, 3.0), (14.0, 2.5)])
SEGMENT = FeasibleSet.from_points([(10.0, 5.0), (12.0, 3.0)])


def test_vertex_hit():
    p = pareto_point_for_time(CHAIN3, 12.0)
    assert (p.travel_time_s, p.emissions_g) == pytest.approx((12.0, 3.0))


def test_interpolated_point():
    p = pareto_point_for_time(SEGMENT, 11.0)
    assert (p.travel_time_s, p.emissions_g) == pytest.approx((11.0, 4.0))


def test_range_error_carries_interval():
    with pytest.raises(PreferredTimeRangeError) as err:
        pareto_point_for_time(SEGMENT, 9.0)
    assert err.value.t_min == pytest.approx(10.0)
    assert err.value.t_max == pytest.approx(12.0)
    assert "[10, 12]" in str(err.value)
    with pytest.raises(PreferredTimeRangeError):
        pareto_point_for_time(SEGMENT, 12.5)


def test_range_boundary_tolerance():
    # reports a hair outside the interval still resolve to the endpoint
    p = pareto_point_for_time(SEGMENT, 12.0 + 5e-10)
    assert p.travel_time_s == pytest.approx(12.0)


def test_estimate_middle_vertex():
    # vertex (12,3) is optimal for weights in [0.5, 0.8]; crossovers from
    # 10-5w = 12-9w and 12-9w = 14-11.5w
    est = estimate_theta(CHAIN3, 12.0)
    assert 0.5 <= est.emission_weight <= 0.8
    assert est.residual == pytest.approx(0.0, abs=1e-9)
    assert (est.matched.travel_time_s, est.matched.emissions_g) == pytest.approx(
        (12.0, 3.0), abs=1e-9
    )
    # tie-break lands near the middle of the optimality interval
    assert abs(est.emission_weight - 0.65) < 0.02


def test_estimate_extreme_reports():
    lo = estimate_theta(CHAIN3, 10.0)
    assert lo.emission_weight < 0.51  # any weight below the first crossover
    assert lo.matched.travel_time_s == pytest.approx(10.0, abs=1e-9)
    hi = estimate_theta(CHAIN3, 14.0)
    assert hi.emission_weight > 0.79
    assert hi.matched.travel_time_s == pytest.approx(14.0, abs=1e-9)


def test_weight_always_in_unit_interval():
    rng = np.random.default_rng(31)
    for _ in range(20):
        pts = np.column_stack([rng.uniform(50, 300, 6), rng.uniform(40, 500, 6)])
        X = FeasibleSet.from_points(pts)
        t_lo, t_hi = X.pareto_time_range
        t = float(rng.uniform(t_lo, t_hi))
        est = estimate_theta(X, t, refinements=1)
        assert 0.0 <= est.emission_weight <= 1.0
        assert est.residual >= 0.0


def test_residual_history_nonincreasing():
    rng = np.random.default_rng(32)
    for _ in range(20):
        pts = np.column_stack([rng.uniform(50, 300, 8), rng.uniform(40, 500, 8)])
        X = FeasibleSet.from_points(pts)
        t_lo, t_hi = X.pareto_time_range
        est = estimate_theta(X, float(rng.uniform(t_lo, t_hi)), refinements=3)
        hist = np.array(est.residual_history)
        assert len(hist) == 4
        assert np.all(np.diff(hist) <= 1e-12)


def test_roundtrip_from_true_weight():
    rng = np.random.default_rng(33)
    for _ in range(25):
        pts = np.column_stack([rng.uniform(60, 400, 9), rng.uniform(50, 900, 9)])
        X = FeasibleSet.from_points(pts)
        w_true = float(rng.uniform(0.02, 0.98))
        t_report = nominal_outcome(X, [1 - w_true, w_true]).travel_time_s
        est = estimate_theta(X, t_report)
        t_hat = nominal_outcome(X, est.theta).travel_time_s
        assert t_hat == pytest.approx(t_report, abs=1e-9)


def test_coarse_grid_consistency_bound():
    # with no refinement the matched time is within two grid cells' worth of
    # front travel time span
    t_lo, t_hi = CHAIN3.pareto_time_range
    for s in (11, 26, 51):
        est = estimate_theta(CHAIN3, 12.0, s=s, refinements=0)
        bound = 2.0 * (t_hi - t_lo) / s
        assert abs(est.matched.travel_time_s - 12.0) <= bound + 1e-9


def test_argument_guards():
    with pytest.raises(ValueError):
        estimate_theta(CHAIN3, 12.0, s=1)
    with pytest.raises(ValueError):
        estimate_theta(CHAIN3, 12.0, refinements=-1)
    with pytest.raises(PreferredTimeRangeError):
        estimate_theta(CHAIN3, 9.0)
