"""Planar convex geometry over (travel time, emissions) outcome points.

Convex hulls use Andrew's monotone chain with sign tests on the raw floats
(relative collinearity tolerance 1e-12). Degenerate hulls (segments, single
points) are first-class citizens: they occur whenever only one route or one
driving style actually varies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .lp import FEAS_TOL

# relative tolerance for treating three points as collinear
COLLINEAR_RTOL = 1e-12


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _turns_left(o, a, b) -> bool:
    """Strict left turn o->a->b, with near-collinear treated as straight."""
    cr = _cross(o, a, b)
    scale = max(
        1.0,
        abs(a[0] - o[0]) + abs(a[1] - o[1]),
        abs(b[0] - o[0]) + abs(b[1] - o[1]),
    )
    return cr > COLLINEAR_RTOL * scale * scale


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull vertices of a 2-d point set.

    Collinear interior points are dropped; a fully collinear input yields its
    two extreme points, a single (possibly repeated) point yields itself.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("convex_hull of empty point set")
    if pts.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinates")

    uniq = sorted({(float(p[0]), float(p[1])) for p in pts})
    if len(uniq) == 1:
        return np.asarray(uniq)

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) > 1 and not _turns_left(chain[-2], chain[-1], p):
                chain.pop()
            chain.append(p)
        return chain

    lower = half(uniq)
    upper = half(uniq[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # all points coincide after tolerance
        hull = [uniq[0], uniq[-1]]
    return np.asarray(hull)


def hull_degeneracy(vertices: np.ndarray) -> str:
    if len(vertices) == 1:
        return "point"
    if len(vertices) == 2:
        return "segment"
    return "full"


def h_representation(vertices) -> tuple[np.ndarray, np.ndarray]:
    """Halfspaces (A, b) with A x <= b and unit outward row normals.

    One row per hull edge; a segment gets its two carrier-line halfspaces
    plus two end caps; a single point gets four axis-aligned caps.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    if len(V) == 1:
        (x, y) = V[0]
        A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        b = np.array([x, -x, y, -y])
        return A, b
    if len(V) == 2:
        p, q = V
        d = q - p
        u = d / np.linalg.norm(d)
        n = np.array([u[1], -u[0]])
        A = np.vstack([n, -n, u, -u])
        b = np.array([n @ p, -(n @ p), u @ q, -(u @ p)])
        return A, b

    rows, rhs = [], []
    k = len(V)
    for i in range(k):
        p, q = V[i], V[(i + 1) % k]
        d = q - p
        # CCW polygon: outward normal is the edge direction rotated -90 deg
        n = np.array([d[1], -d[0]])
        n /= np.linalg.norm(n)
        rows.append(n)
        rhs.append(n @ p)
    return np.asarray(rows), np.asarray(rhs)


def pareto_front_of_vertices(vertices) -> np.ndarray:
    """Non-dominated hull vertices, sorted by travel time ascending.

    A point dominates another if it is no worse in both coordinates and
    strictly better in at least one.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    keep = []
    for i, p in enumerate(V):
        dominated = False
        for j, q in enumerate(V):
            if i == j:
                continue
            if (q[0] <= p[0] and q[1] < p[1]) or (q[0] < p[0] and q[1] <= p[1]):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    chain = np.asarray(sorted(map(tuple, keep)))
    return chain


def within_epsilon(actual, recommended, epsilon: float) -> bool:
    """Closed-ball settlement test: Euclidean distance <= epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    a = np.asarray(actual, dtype=float)
    r = np.asarray(recommended, dtype=float)
    return bool(np.linalg.norm(a - r) <= epsilon)


@dataclass
class FeasibleSet:
    """Convex set of achievable (travel time s, emissions g) outcomes.

    Carries the hull vertices (CCW), the halfspace form A x <= b, and the
    Pareto chain (time ascending, emissions strictly descending).
    """

    vertices: np.ndarray
    A: np.ndarray
    b: np.ndarray
    pareto: np.ndarray
    degeneracy: str = "full"
    _points: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_points(cls, points, tol: float = 1e-7) -> "FeasibleSet":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(pts <= 0):
            raise ValueError("outcome points must be strictly positive")
        verts = convex_hull(pts)
        A, b = h_representation(verts)
        resid = pts @ A.T - b
        worst = float(resid.max())
        if worst > tol:
            raise AssertionError(
                f"hull inconsistency: input point violates H-rep by {worst:g}"
            )
        return cls(
            vertices=verts,
            A=A,
            b=b,
            pareto=pareto_front_of_vertices(verts),
            degeneracy=hull_degeneracy(verts),
            _points=pts,
        )

    def contains(self, point, tol: float = FEAS_TOL) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.A @ p <= self.b + tol))

    @property
    def time_range(self) -> tuple[float, float]:
        return float(self.vertices[:, 0].min()), float(self.vertices[:, 0].max())

    @property
    def pareto_time_range(self) -> tuple[float, float]:
        return float(self.pareto[0, 0]), float(self.pareto[-1, 0])

    def min_emission_vertex(self) -> np.ndarray:
        return self.pareto[-1]

    def min_time_vertex(self) -> np.ndarray:
        return self.pareto[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": self.vertices.tolist(),
                "A": self.A.tolist(),
                "b": self.b.tolist(),
                "pareto": self.pareto.tolist(),
                "degeneracy": self.degeneracy,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FeasibleSet":
        d = json.loads(text)
        return cls(
            vertices=np.asarray(d["vertices"], dtype=float),
            A=np.asarray(d["A"], dtype=float),
            b=np.asarray(d["b"], dtype=float),
            pareto=np.asarray(d["pareto"], dtype=float),
            degeneracy=d["degeneracy"],
        )


def contains(feasible: FeasibleSet, point, tol: float = FEAS_TOL) -> bool:
    return feasible.contains(point, tol)


def pareto_front(feasible: FeasibleSet) -> np.ndarray:
    return feasible.pareto
