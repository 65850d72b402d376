import numpy as np
import pytest
from hypothesis import given, strategies as st

from zdsec.envelope import INFEASIBLE, lower_convex_envelope, pareto_indices


def envelope_oracle(points, x):
    """min rate over single points and two-point mixtures reaching abscissa <= x."""
    pts = np.asarray(points, dtype=float)
    X, Y = pts[:, 0], pts[:, 1]
    single = Y[X <= x + 1e-12]
    best = single.min() if single.size else np.inf
    left, right = X <= x, X >= x
    if left.any() and right.any():
        xi, yi = X[left][:, None], Y[left][:, None]
        xj, yj = X[right][None, :], Y[right][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = (xj - x) / (xj - xi)
            mix = np.where(xj > xi, lam * yi + (1 - lam) * yj, np.inf)
        best = min(best, mix.min())
    return best


point_sets = st.lists(
    st.tuples(st.floats(0, 10, allow_nan=False), st.floats(0, 10, allow_nan=False)), min_size=1, max_size=12
)


@given(point_sets, st.floats(0, 11))
def test_envelope_matches_oracle(points, x):
    env = lower_convex_envelope(points)
    y = env(x)
    if x < min(p[0] for p in points) - 1e-12:
        assert y is INFEASIBLE
    else:
        assert y == pytest.approx(envelope_oracle(points, x), abs=1e-9)


@given(point_sets)
def test_envelope_convex_nonincreasing(points):
    env = lower_convex_envelope(points)
    xs = np.linspace(env.x_min, 11, 40)
    ys = np.array([env(x) for x in xs])
    assert np.all(np.diff(ys) <= 1e-9)
    assert np.all(ys[:-2] + ys[2:] - 2 * ys[1:-1] >= -1e-9)
    for p in points:
        assert p[1] >= env(p[0]) - 1e-9


def test_infeasible_marker():
    env = lower_convex_envelope([(1.0, 2.0), (2.0, 0.0)])
    assert env(0.5) is INFEASIBLE
    assert not INFEASIBLE
    assert repr(INFEASIBLE) == "Infeasible"
    assert env.segment(0.5) is INFEASIBLE


def test_collinear_points_dropped_and_segments():
    env = lower_convex_envelope([(0, 2), (1, 1), (2, 0), (3, 0)])
    assert env.vertices == ((0.0, 2.0), (2.0, 0.0))
    i, j, lam = env.segment(0.5)
    assert (i, j) == (0, 1) and lam == pytest.approx(0.75)
    assert env(5) == 0.0
    assert env.contains_on_boundary((1, 1))
    assert not env.contains_on_boundary((1, 1.5))


def test_pareto_indices():
    pts = [(0, 1), (0, 1), (1, 1), (1, 0.5), (2, 0.7)]
    assert pareto_indices(pts) == [0, 3]


def test_empty_rejected():
    with pytest.raises(ValueError):
        lower_convex_envelope([])
