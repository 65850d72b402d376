"""Lower convex envelope of a finite point set, for time-sharing regions.

Both the (R, R_k) region of the block scheme and the causal rate-distortion
curves are "achievable set = everything above and to the right of a finite
point set, convexified". The envelope returned here is the non-increasing
lower convex chain of those points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

TOL = 1e-12


class _Infeasible:
    """Marker for evaluating an envelope left of its smallest abscissa."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infeasible"

    def __bool__(self):
        return False


INFEASIBLE = _Infeasible()


def pareto_indices(points: Sequence[tuple[float, float]], tol: float = TOL) -> list[int]:
    """Indices of Pareto-minimal points, sorted by x; duplicates keep the first."""
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1], i))
    keep, best = [], float("inf")
    for i in order:
        if points[i][1] < best - tol:
            keep.append(i)
            best = points[i][1]
    return keep


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear, convex, non-increasing envelope through ``vertices``.

    ``vertex_ids`` index into the point list the envelope was built from,
    so callers can recover witnesses.
    """

    vertices: tuple[tuple[float, float], ...]
    vertex_ids: tuple[int, ...]

    @property
    def x_min(self) -> float:
        return self.vertices[0][0]

    def segment(self, x: float):
        """Return ``(i, j, lam)`` with x = lam*x_i + (1-lam)*x_j, or INFEASIBLE."""
        v = self.vertices
        if x < v[0][0] - TOL:
            return INFEASIBLE
        # the envelope is non-increasing, so the rightmost reachable vertex is best
        i = max(idx for idx, (xi, _) in enumerate(v) if xi <= x + TOL)
        if i == len(v) - 1:
            return i, i, 1.0
        x0, x1 = v[i][0], v[i + 1][0]
        lam = min(1.0, max(0.0, (x1 - x) / (x1 - x0)))
        return i, i + 1, lam

    def __call__(self, x: float):
        seg = self.segment(x)
        if seg is INFEASIBLE:
            return INFEASIBLE
        i, j, lam = seg
        return lam * self.vertices[i][1] + (1.0 - lam) * self.vertices[j][1]

    def contains_on_boundary(self, point, tol: float = 1e-9) -> bool:
        y = self(point[0])
        return y is not INFEASIBLE and abs(point[1] - y) <= tol


def lower_convex_envelope(points: Sequence[tuple[float, float]], tol: float = TOL) -> Envelope:
    """Non-increasing lower convex hull of ``points`` (Andrew's monotone chain).

    Collinear interior points are dropped, so each vertex is an extreme
    point; on ties the leftmost point is kept.
    """
    if not points:
        raise ValueError("envelope of an empty point set")
    ids = pareto_indices(points, tol)
    hull: list[int] = []
    for i in ids:
        while len(hull) >= 2 and _cross(points[hull[-2]], points[hull[-1]], points[i]) <= tol:
            hull.pop()
        hull.append(i)
    return Envelope(
        vertices=tuple((float(points[i][0]), float(points[i][1])) for i in hull),
        vertex_ids=tuple(hull),
    )
