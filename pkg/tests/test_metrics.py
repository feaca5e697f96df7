import math

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from masr.imgcore import DimensionError
from masr.metrics import NoiseConfig, add_measurement_noise, evaluate, nre, psnr, ssim


def test_psnr_examples():
    a = np.full((8, 8), 100.0)
    assert psnr(a, a) == math.inf
    b = a.copy()
    b[0, 0] += 8.0  # mse = 1
    assert psnr(a, b) == pytest.approx(20 * math.log10(255), abs=1e-12)
    assert psnr(np.zeros((4, 4)), np.full((4, 4), 255.0)) == 0.0
    with pytest.raises(DimensionError):
        psnr(a, np.zeros((4, 4)))


def test_nre_examples():
    a = np.arange(1, 17, dtype=float).reshape(4, 4)
    assert nre(a, a) == 0.0
    assert nre(a, np.zeros_like(a)) == 1.0
    assert nre(a, 2 * a) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        nre(np.zeros((3, 3)), np.ones((3, 3)))


def test_psnr_nre_order(rng):
    ref = rng.uniform(0, 255, (16, 16))
    noisy = [ref + rng.normal(0, s, ref.shape) for s in (1, 5, 20)]
    p = [psnr(ref, x) for x in noisy]
    n = [nre(ref, x) for x in noisy]
    assert p == sorted(p, reverse=True) and n == sorted(n)


def test_ssim_matches_skimage(rng):
    ref = rng.uniform(0, 255, (40, 37))
    est = np.clip(ref + rng.normal(0, 20, ref.shape), 0, 255)
    expected = structural_similarity(
        ref, est, data_range=255, gaussian_weights=True, sigma=1.5, use_sample_covariance=False
    )
    assert ssim(ref, est) == pytest.approx(expected, abs=1e-10)


def test_ssim_properties(rng):
    ref = rng.uniform(0, 255, (24, 24))
    est = rng.uniform(0, 255, (24, 24))
    assert ssim(ref, ref) == 1.0
    assert ssim(ref, est) == pytest.approx(ssim(est, ref), abs=1e-15)
    assert ssim(ref, 255 - ref) < 1.0
    with pytest.raises(DimensionError):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))


def test_noise_zero_variance_is_copy(rng):
    img = rng.random((8, 8))
    mask = rng.random((8, 8)) < 0.5
    out = add_measurement_noise(img, mask, NoiseConfig(0.0))
    assert np.array_equal(out, img) and out is not img


def test_noise_only_on_live_cells(rng):
    img = rng.random((32, 32))
    mask = rng.random((32, 32)) < 0.5
    out = add_measurement_noise(img, mask, NoiseConfig(1e-2, seed=3))
    assert np.array_equal(out[~mask], img[~mask])
    assert not np.array_equal(out[mask], img[mask])
    assert out.min() >= 0 and out.max() <= 1
    assert np.array_equal(out, add_measurement_noise(img, mask, NoiseConfig(1e-2, seed=3)))


def test_noise_variance_scale():
    img = np.full((200, 200), 0.5)
    out = add_measurement_noise(img, np.ones_like(img, bool), NoiseConfig(1e-3, seed=1))
    assert np.var(out - img) == pytest.approx(1e-3, rel=0.05)
    with pytest.raises(ValueError):
        NoiseConfig(-1.0)


def test_evaluate(rng):
    ref = rng.uniform(1, 255, (16, 16))
    mask = np.zeros((16, 16), bool)
    mask[:4] = True
    rep = evaluate(ref, ref, mask)
    assert rep.psnr == math.inf and rep.nre == 0.0 and rep.ssim == 1.0
    assert rep.sampling_rate == 25.0
