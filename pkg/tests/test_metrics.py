import numpy as np
import pytest

from vecdenoise.errors import InputError
from oracles import naive_ssim
from vecdenoise.metrics import gaussian_window, psnr, ssim


def test_psnr_identical_is_capped(rng):
    a = rng.random((8, 8, 3))
    assert psnr(a, a) == 99.0


def test_psnr_uniform_offset():
    a = np.full((8, 8, 3), 0.3)
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-6)


def test_psnr_symmetric_and_monotone(rng):
    a = rng.random((16, 16, 3))
    noise = rng.standard_normal(a.shape)
    assert psnr(a, a + 0.05 * noise) == psnr(a + 0.05 * noise, a)
    values = [psnr(a, a + s * noise) for s in (0.01, 0.02, 0.05, 0.1)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_psnr_shape_mismatch():
    with pytest.raises(InputError):
        psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


def test_ssim_identical(rng):
    a = rng.random((16, 16, 3))
    assert ssim(a, a) == 1.0


def test_ssim_constants_luminance_term():
    a = np.full((16, 16, 3), 0.5)
    b = np.full((16, 16, 3), 0.7)
    c1 = 0.01**2
    expected = (2 * 0.5 * 0.7 + c1) / (0.5**2 + 0.7**2 + c1)
    assert ssim(a, b) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_ssim_matches_naive(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((16, 16, 3)), rng.random((16, 16, 3))
    assert abs(ssim(a, b) - naive_ssim(a, b)) < 1e-6


def test_ssim_properties(rng):
    a = rng.random((20, 24, 3))
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
    assert ssim(a, b) == ssim(b, a)
    assert ssim(a, b) < 1.0


def test_ssim_rejects_small():
    with pytest.raises(InputError):
        ssim(np.zeros((10, 20, 3)), np.zeros((10, 20, 3)))


def test_window_normalized():
    w = gaussian_window()
    assert w.shape == (11, 11)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
