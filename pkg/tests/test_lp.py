import numpy as np
import pytest

from ecoplanner.geometry import convex_hull, h_representation
from ecoplanner.lp import LinearProgram, LpSolution, solve_lp, vertex_enum_oracle


def triangle_lp(c):
    # hull of {(1,3),(2,1),(3,0.5)}: all three points are vertices
    A, b = h_representation(convex_hull([(1, 3), (2, 1), (3, 0.5)]))
    return LinearProgram(c, A, b)


def test_interval_minimum():
    # minimize x over 1 <= x <= 5
    lp = LinearProgram([1.0], [[-1.0], [1.0]], [-1.0, 5.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_triangle_emission_min():
    sol = solve_lp(triangle_lp([0.0, 1.0]))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(sol.x, [3.0, 0.5], atol=1e-9)


def test_unbounded():
    lp = LinearProgram([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    assert solve_lp(lp).status == "unbounded"


def test_infeasible():
    lp = LinearProgram([1.0], [[1.0], [-1.0]], [0.0, -1.0])
    assert solve_lp(lp).status == "infeasible"


def test_square_diagonal_objective_hits_corner():
    A = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    b = np.array([1.0, 0.0, 1.0, 0.0])
    sol = solve_lp(LinearProgram([1.0, 1.0], A, b))
    assert sol.status == "optimal"
    assert np.allclose(sol.x, [0.0, 0.0], atol=1e-9)


def test_negative_rhs_needs_phase1():
    # x >= 2, y >= 3, x + y <= 10, minimize x + 2y
    A = np.array([[-1.0, 0], [0, -1], [1, 1]])
    b = np.array([-2.0, -3.0, 10.0])
    sol = solve_lp(LinearProgram([1.0, 2.0], A, b))
    assert sol.status == "optimal"
    assert np.allclose(sol.x, [2.0, 3.0], atol=1e-9)
    assert sol.objective == pytest.approx(8.0, abs=1e-9)


def test_shape_validation():
    with pytest.raises(ValueError):
        LinearProgram([1.0, 2.0], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        LinearProgram([np.nan], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], [[np.inf]], [1.0])


def test_tight_constraints_reported():
    sol = solve_lp(LinearProgram([1.0], [[-1.0], [1.0]], [-1.0, 5.0]))
    assert 0 in sol.tight
    assert 1 not in sol.tight


def test_is_optimal_flag():
    assert LpSolution(status="optimal").is_optimal
    assert not LpSolution(status="infeasible").is_optimal


def test_oracle_guards():
    A = np.eye(4)
    with pytest.raises(ValueError):
        vertex_enum_oracle(LinearProgram(np.ones(4), A, np.ones(4)))
    # rank-deficient A has no vertices to enumerate
    with pytest.raises(ValueError):
        vertex_enum_oracle(LinearProgram([1.0, 0.0], [[0.0, 1.0]], [1.0]))


def test_oracle_statuses():
    assert vertex_enum_oracle(
        LinearProgram([1.0], [[1.0], [-1.0]], [0.0, -1.0])
    ).status == "infeasible"
    # pointed but unbounded: quadrant x,y >= 0 capped only above in y
    lp = LinearProgram(
        [-1.0, 0.0], [[-1.0, 0.0], [0.0, -1.0], [0.0, 1.0]], [0.0, 0.0, 1.0]
    )
    assert vertex_enum_oracle(lp).status == "unbounded"
    assert solve_lp(lp).status == "unbounded"


def test_weak_duality_spot_check():
    rng = np.random.default_rng(5)
    lp = triangle_lp([0.3, 0.7])
    opt = solve_lp(lp).objective
    V = np.array([[1, 3], [2, 1], [3, 0.5]], dtype=float)
    for _ in range(200):
        lam = rng.dirichlet(np.ones(3))
        x = lam @ V  # feasible by convexity
        assert lp.c @ x >= opt - 1e-9


def test_row_permutation_invariance():
    rng = np.random.default_rng(6)
    lp = triangle_lp([0.4, 0.6])
    base = solve_lp(lp).objective
    for _ in range(20):
        perm = rng.permutation(lp.n_rows)
        sol = solve_lp(LinearProgram(lp.c, lp.A[perm], lp.b[perm]))
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(base, abs=1e-9)


def test_objective_scaling():
    lp = triangle_lp([0.2, 0.8])
    ref = solve_lp(lp)
    for s in (0.5, 3.0, 17.0):
        sol = solve_lp(LinearProgram(s * lp.c, lp.A, lp.b))
        assert sol.objective == pytest.approx(s * ref.objective, abs=1e-9)
        assert sol.tight == ref.tight


def test_matches_oracle_on_random_polytopes():
    rng = np.random.default_rng(7)
    for _ in range(100):
        pts = rng.uniform(1.0, 100.0, size=(rng.integers(3, 10), 2))
        A, b = h_representation(convex_hull(pts))
        lp = LinearProgram(rng.normal(size=2), A, b)
        got = solve_lp(lp)
        want = vertex_enum_oracle(lp)
        assert got.status == want.status == "optimal"
        assert got.objective == pytest.approx(want.objective, abs=1e-9)
