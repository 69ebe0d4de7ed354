import numpy as np
import pytest
from scipy import ndimage

from vecdenoise.errors import InputError
from vecdenoise.image_core import constant_image
from vecdenoise.segmentation import (
    Component,
    component_diff,
    label_map,
    new_components_at_scale,
    schedule_components,
    segment_components,
)


def checkerboard(size=8, block=2):
    yy, xx = np.mgrid[0:size, 0:size]
    return (((yy // block) + (xx // block)) % 2).astype(float)


def random_blocky(seed, size=24):
    rng = np.random.default_rng(seed)
    coarse = rng.integers(0, 4, (size // 4, size // 4)) / 3.0
    img = np.kron(coarse, np.ones((4, 4)))
    img = img + rng.normal(0, 0.01, img.shape)
    return np.repeat(img[:, :, None], 3, axis=2)


def test_uniform_image_single_component():
    comps = segment_components(constant_image(9, 7, 0.4), 0.05, 1)
    assert len(comps) == 1
    assert comps[0].area == 63
    assert comps[0].mask.all()


def test_two_halves():
    img = np.zeros((4, 4, 3))
    img[:, :2] = 0.2
    img[:, 2:] = 0.8
    comps = segment_components(img, 0.05, 1)
    assert len(comps) == 2
    np.testing.assert_allclose(comps[0].mean_color, 0.2)
    np.testing.assert_allclose(comps[1].mean_color, 0.8)
    assert comps[0].area == comps[1].area == 8
    assert comps[0].bbox == (0, 0, 1, 3)
    assert comps[1].bbox == (2, 0, 3, 3)


def test_checkerboard_all_discarded():
    img = np.repeat(checkerboard()[:, :, None], 3, axis=2)
    # 16 diagonal-touching 2x2 blocks, each an isolated 4-pixel component
    assert len(segment_components(img, 0.05, 1)) == 16
    assert segment_components(img, 0.05, 5) == []


def test_running_mean_tolerance():
    # a slow ramp drifts the running mean, so it still forms one region
    ramp = np.linspace(0.0, 0.06, 10)
    img = np.repeat(np.tile(ramp, (2, 1))[:, :, None], 3, axis=2)
    assert len(segment_components(img, 0.05, 1)) == 1
    step = np.array([[0.0, 0.0, 0.2, 0.2]])
    img = np.repeat(step[:, :, None], 3, axis=2)
    assert len(segment_components(img, 0.05, 1)) == 2


@pytest.mark.parametrize("seed", range(10))
def test_component_invariants(seed):
    img = random_blocky(seed)
    comps = segment_components(img, 0.05, 3)
    cover = np.zeros(img.shape[:2], int)
    for c in comps:
        cover += c.mask
        assert c.area == c.mask.sum() >= 3
        ys, xs = np.nonzero(c.mask)
        assert c.bbox == (xs.min(), ys.min(), xs.max(), ys.max())
        assert ndimage.label(c.mask)[1] == 1  # 4-connected by default structure
        pix = img[c.mask]
        assert np.all(c.mean_color >= pix.min(axis=0) - 1e-12)
        assert np.all(c.mean_color <= pix.max(axis=0) + 1e-12)
    assert cover.max() <= 1  # pairwise disjoint
    again = segment_components(img, 0.05, 3)
    assert [c.id for c in again] == [c.id for c in comps]
    assert all(np.array_equal(a.mask, b.mask) for a, b in zip(again, comps))
    labels = label_map(comps, img.shape[:2])
    assert (labels > 0).sum() == sum(c.area for c in comps)


def test_input_validation():
    with pytest.raises(InputError):
        segment_components(np.zeros((3, 3, 3)), 0.0, 1)
    with pytest.raises(InputError):
        segment_components(np.zeros((3, 3, 3)), 0.05, 0)


def _square_component(size=6):
    mask = np.zeros((size, size), bool)
    mask[1:4, 2:5] = True
    return Component.from_mask(0, mask, np.zeros((size, size, 3)))


def test_component_diff():
    comp = _square_component()
    rng = np.random.default_rng(1)
    ref = rng.random((6, 6, 3))
    assert component_diff(comp, ref, ref) == 0.0
    assert component_diff(comp, ref + 0.07, ref) == pytest.approx(0.07, abs=1e-12)
    # only masked pixels count
    other = ref.copy()
    other[~comp.mask] += 5.0
    assert component_diff(comp, other, ref) == 0.0


@pytest.mark.parametrize("offset,accepted", [(0.07, True), (0.15, False)])
def test_diff_threshold_decision(offset, accepted):
    comp = _square_component()
    ref = np.full((6, 6, 3), 0.5)
    assert (component_diff(comp, ref + offset, ref) < 0.1) is accepted


def test_component_diff_rejects_empty():
    comp = _square_component()
    comp.mask = np.zeros_like(comp.mask)
    with pytest.raises(InputError):
        component_diff(comp, np.zeros((6, 6, 3)), np.zeros((6, 6, 3)))


def _comp(id, area):
    mask = np.zeros((1, 64), bool)
    mask[0, :area] = True
    return Component(id, mask, area, (0, 0, area - 1, 0), np.zeros(3))


def test_schedule_order():
    comps = [_comp(1, 10), _comp(2, 40), _comp(3, 40)]
    assert schedule_components(comps) == [2, 3, 1]
    assert schedule_components([_comp(5, 3)]) == [5]
    assert schedule_components([]) == []


def test_schedule_law_random(rng):
    comps = [_comp(i, int(a)) for i, a in enumerate(rng.integers(1, 20, 30))]
    order = schedule_components(comps)
    areas = {c.id: c.area for c in comps}
    for a, b in zip(order, order[1:]):
        assert areas[a] > areas[b] or (areas[a] == areas[b] and a < b)


def test_new_components_none_when_matched(rng):
    level = rng.random((16, 16, 3))
    assert new_components_at_scale(level, level.copy(), 0.05, 1, 0.05) == []


def test_new_component_square():
    level = np.full((40, 40, 3), 0.3)
    level[10:30, 5:25] = 0.9
    render = np.full((40, 40, 3), 0.3)
    comps = new_components_at_scale(level, render, 0.05, 16, 0.05)
    assert len(comps) == 1
    assert comps[0].area == 400
    assert comps[0].bbox == (5, 10, 24, 29)


def test_new_components_area_filter():
    level = np.full((20, 20, 3), 0.3)
    level[3, 3] = 0.9
    level[15, 12] = 0.9
    render = np.full((20, 20, 3), 0.3)
    assert new_components_at_scale(level, render, 0.05, 5, 0.05) == []
    assert len(new_components_at_scale(level, render, 0.05, 1, 0.05)) == 2


def test_new_components_ignore_small_residual(rng):
    level = rng.random((16, 16, 3))
    render = level + 0.049
    assert new_components_at_scale(level, render, 0.05, 1, 0.05) == []
