"""Small dense LP core: minimize c.x subject to A x <= b with free variables.

Problems here are tiny (a few hundred rows at most), so the solver is a plain
dense two-phase simplex with Bland's rule for determinism and anti-cycling.
A brute-force vertex enumerator is provided as an independent test oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# Absolute feasibility tolerance on constraint residuals, shared by the
# mechanism layer.
FEAS_TOL = 1e-9

_MAX_PIVOTS = 200_000


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  s.t.  A x <= b, x unrestricted in sign."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape != (b.shape[0], c.shape[0]):
            raise ValueError(
                f"shape mismatch: A {A.shape}, b {b.shape}, c {c.shape}"
            )
        if A.shape[0] < 1 or c.shape[0] < 1:
            raise ValueError("need at least one row and one variable")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    tight: tuple[int, ...] = ()

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _bland_optimize(T: np.ndarray, basis: np.ndarray, red: np.ndarray) -> str:
    """Run simplex pivots until optimal/unbounded. `red` is the reduced-cost
    row (objective excluded from T); both are updated in place."""
    for _ in range(_MAX_PIVOTS):
        entering = -1
        for j in range(T.shape[1] - 1):
            if red[j] < -FEAS_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        # ratio test; Bland ties: smallest basic-variable index
        best_ratio = np.inf
        leave = -1
        for i in range(T.shape[0]):
            a = T[i, entering]
            if a > FEAS_TOL:
                ratio = T[i, -1] / a
                if ratio < best_ratio - FEAS_TOL or (
                    ratio < best_ratio + FEAS_TOL
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    if ratio < best_ratio:
                        best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, entering)
        red -= red[entering] * T[leave]
    raise RuntimeError("simplex failed to terminate (pivot cap reached)")


def _reduced_costs(obj: np.ndarray, T: np.ndarray, basis: np.ndarray) -> np.ndarray:
    red = np.append(obj.astype(float), 0.0)
    for i, j in enumerate(basis):
        if red[j] != 0.0:
            red -= red[j] * T[i]
    return red


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex with Bland's rule.

    Free variables are split into positive/negative parts internally. The
    returned point is the basic solution the deterministic pivot sequence
    reaches; objective values are reproducible to FEAS_TOL across runs.
    """
    n, k = lp.n_vars, lp.n_rows
    A, b, c = lp.A, lp.b, lp.c

    # columns: u (n) | w (n) | slacks (k) | artificials (appended)
    ncols = 2 * n + k
    body = np.zeros((k, ncols))
    body[:, :n] = A
    body[:, n : 2 * n] = -A
    body[:, 2 * n :] = np.eye(k)
    rhs = b.copy()

    neg = rhs < 0.0
    body[neg] *= -1.0
    rhs[neg] *= -1.0

    n_art = int(np.count_nonzero(neg))
    basis = np.zeros(k, dtype=int)
    if n_art:
        art_block = np.zeros((k, n_art))
        for slot, i in enumerate(np.flatnonzero(neg)):
            art_block[i, slot] = 1.0
            basis[i] = ncols + slot
        body = np.hstack([body, art_block])
    basis[~neg] = 2 * n + np.flatnonzero(~neg)

    T = np.hstack([body, rhs[:, None]])

    if n_art:
        obj1 = np.zeros(body.shape[1])
        obj1[ncols:] = 1.0
        red = _reduced_costs(obj1, T, basis)
        status = _bland_optimize(T, basis, red)
        assert status == "optimal"  # phase 1 is bounded below by 0
        if -red[-1] > 1e-7:
            return LpSolution(status="infeasible")
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(k, dtype=bool)
        for i in range(k):
            if basis[i] >= ncols:
                piv = -1
                for j in range(ncols):
                    if abs(T[i, j]) > 1e-10:
                        piv = j
                        break
                if piv < 0:
                    keep[i] = False
                else:
                    _pivot(T, basis, i, piv)
        T = np.hstack([T[keep][:, :ncols], T[keep][:, -1:]])
        basis = basis[keep]

    obj2 = np.zeros(ncols)
    obj2[:n] = c
    obj2[n : 2 * n] = -c
    red = _reduced_costs(obj2, T, basis)
    status = _bland_optimize(T, basis, red)
    if status == "unbounded":
        return LpSolution(status="unbounded")

    full = np.zeros(ncols)
    full[basis] = T[:, -1]
    x = full[:n] - full[n : 2 * n]
    resid = A @ x - b
    tight = tuple(int(i) for i in np.flatnonzero(np.abs(resid) <= 1e-7))
    return LpSolution(
        status="optimal", x=x, objective=float(c @ x), tight=tight
    )


def _basic_points(A: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    """All feasible basic solutions (vertices) of {A x <= b}."""
    n = A.shape[1]
    out = []
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + 1e-9):
            out.append(x)
    return out


def vertex_enum_oracle(lp: LinearProgram) -> LpSolution:
    """Exact optimum by enumerating all feasible basic solutions.

    Test oracle only: requires n <= 3 variables and k <= 25 rows, and a
    pointed feasible region (rank(A) = n), which holds for every polytope
    the test suite generates.
    """
    n, k = lp.n_vars, lp.n_rows
    if n > 3 or k > 25:
        raise ValueError(f"oracle limited to n<=3, k<=25 (got n={n}, k={k})")
    if np.linalg.matrix_rank(lp.A, tol=1e-12) < n:
        raise ValueError("feasible region has no vertices (rank-deficient A)")

    candidates = _basic_points(lp.A, lp.b)
    if not candidates:
        return LpSolution(status="infeasible")

    # unbounded iff some recession direction improves the objective; the
    # recession cone is probed through a box-bounded vertex enumeration
    A_rec = np.vstack([lp.A, np.eye(n), -np.eye(n)])
    b_rec = np.concatenate([np.zeros(k), np.ones(2 * n)])
    best_dir = min(float(lp.c @ d) for d in _basic_points(A_rec, b_rec))
    if best_dir < -1e-9:
        return LpSolution(status="unbounded")

    best = min(candidates, key=lambda x: (float(lp.c @ x),) + tuple(x))
    resid = lp.A @ best - lp.b
    tight = tuple(int(i) for i in np.flatnonzero(np.abs(resid) <= 1e-7))
    return LpSolution(
        status="optimal", x=best, objective=float(lp.c @ best), tight=tight
    )
