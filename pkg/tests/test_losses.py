import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vecdenoise.errors import InputError
from vecdenoise.losses import (
    update_weight_map,
    weighted_mse,
    weighted_mse_grad,
    xing_loss,
    xing_loss_grad,
)
from vecdenoise.vector_paths import ClosedBezierPath, ellipse_path

CROSSED = [[0, 0], [1, 1], [1, 0], [0, 1]]


def single_segment_path(ctrl):
    """Two-segment closed path whose first segment is ``ctrl``."""
    ctrl = np.asarray(ctrl, dtype=float)
    back = [ctrl[3], ctrl[3] + (ctrl[0] - ctrl[3]) / 3, ctrl[3] + 2 * (ctrl[0] - ctrl[3]) / 3, ctrl[0]]
    return ClosedBezierPath.from_segments([ctrl, back], [0, 0, 0])


def segment_penalty(ctrl):
    """Hand evaluation of the per-segment formula."""
    p0, p1, p2, p3 = np.asarray(ctrl, dtype=float)
    e1, e2, e3 = p1 - p0, p2 - p1, p3 - p2
    cross = lambda a, b: a[0] * b[1] - a[1] * b[0]  # noqa: E731
    d1 = 0.5 * (1 + np.sign(cross(e1, e2)))
    n1, n3 = np.linalg.norm(e1), np.linalg.norm(e3)
    # handles shorter than 1e-9 count as degenerate; near-parallel as zero
    d2 = cross(e1, e3) / (n1 * n3) if min(n1, n3) >= 1e-9 else 0.0
    d2 = 0.0 if abs(d2) < 1e-12 else d2
    return d1 * max(0.0, -d2) + (1 - d1) * max(0.0, d2)


def test_mse_identity_and_constant():
    a = np.random.default_rng(0).random((5, 6, 3))
    assert weighted_mse(a, a) == 0.0
    assert weighted_mse(a + 0.1, a, np.ones((5, 6))) == pytest.approx(0.01, abs=1e-15)


def test_mse_weighted_hand_instance():
    a = np.zeros((2, 2, 3))
    b = np.zeros((2, 2, 3))
    b[:, 0] = 0.2  # residual on the left column only
    uniform = weighted_mse(a, b, np.ones((2, 2)))
    w = np.array([[2.0, 1.0], [2.0, 1.0]])
    # hand sum: 2 pixels x 3 channels x 0.04 x weight, over 12 entries
    assert uniform == pytest.approx(6 * 0.04 / 12)
    assert weighted_mse(a, b, w) == pytest.approx(2 * 6 * 0.04 / 12)
    assert weighted_mse(a, b, w) / uniform == pytest.approx(2.0)


def test_mse_shape_checks():
    with pytest.raises(InputError):
        weighted_mse(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))
    with pytest.raises(InputError):
        weighted_mse(np.zeros((2, 2, 3)), np.zeros((2, 2, 3)), np.ones((3, 2)))


def test_mse_grad_matches_fd(rng):
    a, b, w = rng.random((3, 4, 3)), rng.random((3, 4, 3)), rng.random((3, 4))
    g = weighted_mse_grad(a, b, w)
    e = np.zeros_like(a)
    e[1, 2, 0] = 1e-6
    fd = (weighted_mse(a + e, b, w) - weighted_mse(a - e, b, w)) / 2e-6
    assert g[1, 2, 0] == pytest.approx(fd, rel=1e-6)


def test_xing_zero_on_convex_ccw():
    square = ellipse_path((0, 0), (3, 3), np.eye(2), 4, [0, 0, 0])
    assert xing_loss(square) == 0.0
    reversed_square = ClosedBezierPath(square.points[::-1].copy(), [0, 0, 0])
    assert xing_loss(reversed_square) == 0.0


def test_xing_positive_on_crossed_polygon():
    path = single_segment_path(CROSSED)
    # e1 x e2 < 0 so D1 = 0; e1 x e3 = 1 * 1 - 1 * (-1) = 2, |e1||e3| = 2, D2 = 1
    assert segment_penalty(CROSSED) == pytest.approx(1.0)
    assert xing_loss(path) == pytest.approx(1.0)


def test_xing_zero_on_collinear():
    line = [[0, 0], [1, 0], [2, 0], [3, 0]]
    assert xing_loss(single_segment_path(line)) == 0.0
    folded = [[0, 0], [2, 0], [1, 0], [3, 0]]
    assert xing_loss(single_segment_path(folded)) == 0.0


def test_xing_degenerate_handle():
    ctrl = [[0, 0], [0, 0], [1, 1], [2, 0]]
    assert xing_loss(single_segment_path(ctrl)) == 0.0


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (9, 2), elements=st.floats(-20, 20)))
@example(np.array([[2.2e-16, 0], [0, 0], [0, 1e-16], [0, 0]] + [[0, 0]] * 5))
def test_xing_matches_hand_formula_and_nonnegative(points):
    path = ClosedBezierPath(points, [0, 0, 0])
    expected = sum(segment_penalty(s) for s in path.segment_arrays())
    assert xing_loss(path) == pytest.approx(expected, abs=1e-12)
    assert xing_loss(path) >= 0.0


@settings(max_examples=40, deadline=None)
@given(
    cx=st.floats(-50, 50),
    cy=st.floats(-50, 50),
    a=st.floats(1, 40),
    b=st.floats(1, 40),
    th=st.floats(0, np.pi),
    k=st.integers(2, 9),
)
def test_xing_zero_on_ellipses(cx, cy, a, b, th, k):
    axes = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    assert xing_loss(ellipse_path((cx, cy), (a, b), axes, k, [0, 0, 0])) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_xing_grad_matches_fd(seed):
    rng = np.random.default_rng(seed)
    path = ClosedBezierPath(rng.normal(0, 5, (12, 2)), [0, 0, 0])
    g = xing_loss_grad(path)
    for i in range(12):
        for d in range(2):
            p, m = path.copy(), path.copy()
            p.points[i, d] += 1e-6
            m.points[i, d] -= 1e-6
            fd = (xing_loss(p) - xing_loss(m)) / 2e-6
            assert g[i, d] == pytest.approx(fd, rel=1e-4, abs=1e-7)


def test_weight_map_uniform_when_perfect(rng):
    a = rng.random((6, 5, 3))
    assert np.all(update_weight_map(a, a) == 1.0)


def test_weight_map_focuses_residual():
    a = np.zeros((8, 8, 3))
    b = np.zeros((8, 8, 3))
    b[:4, 4:] = 0.3
    w = update_weight_map(a, b)
    quads = [w[:4, :4], w[:4, 4:], w[4:, :4], w[4:, 4:]]
    means = [q.mean() for q in quads]
    assert all(means[1] > m for i, m in enumerate(means) if i != 1)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-4, 1.0))
def test_weight_map_invariants(seed, scale):
    rng = np.random.default_rng(seed)
    a = rng.random((7, 9, 3))
    b = a + scale * rng.standard_normal((7, 9, 3)) ** 3
    w = update_weight_map(a, b)
    assert abs(w.mean() - 1.0) < 1e-9
    assert w.min() >= 0.1


def test_xing_zero_on_half_ellipse_arcs():
    # k = 2 arcs have antiparallel handles, so D2 is zero up to roundoff
    rng = np.random.default_rng(1)
    for _ in range(300):
        th = rng.uniform(0, np.pi)
        axes = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
        path = ellipse_path(rng.uniform(-50, 50, 2), rng.uniform(1, 30, 2), axes, 2, [0, 0, 0])
        assert xing_loss(path) == 0.0
        assert not xing_loss_grad(path).any()
