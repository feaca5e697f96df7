import numpy as np
import pytest
from conftest import synthetic
from hypothesis import given, settings
from hypothesis import strategies as st

from masr.gradient import decompose, normalize_directions, sobel
from masr.imgcore import block_rng
from masr.sampler import (
    SamplerConfig,
    grp,
    nonuniform_mask,
    random_baseline_mask,
    sample_image,
    sample_patch,
    uniform_mask,
    uniform_patterns,
)


def _cells(mask):
    return {(int(r) + 1, int(c) + 1) for r, c in np.argwhere(mask)}


@pytest.mark.parametrize(
    "eta, count",
    [(0, 1), (9.99, 1), (10, 2), (24.9, 2), (25, 4), (45, 8), (69.9, 8), (70, 16), (100, 16)],
)
def test_uniform_mask_thresholds(eta, count):
    assert uniform_mask(eta).sum() == count


def test_uniform_mask_lattices():
    assert _cells(uniform_mask(0)) == {(4, 4)}
    assert _cells(uniform_mask(45)) == {(2, 2), (2, 6), (6, 2), (6, 6), (4, 4), (4, 8), (8, 4), (8, 8)}
    assert _cells(uniform_mask(100)) == {(r, c) for r in (2, 4, 6, 8) for c in (2, 4, 6, 8)}
    with pytest.raises(ValueError):
        uniform_mask(100.5)


def test_uniform_patterns_nested_counts():
    pats = uniform_patterns()
    assert pats.sum(axis=(1, 2)).tolist() == [1, 2, 4, 8, 16]
    # UBT is contained in UHT, which is contained in UVH
    assert np.all(pats[2] <= pats[3]) and np.all(pats[3] <= pats[4])


def test_grp_examples():
    pu = uniform_mask(0)
    assert not grp(pu, 0, block_rng(0, 0)).any()
    full = grp(pu, 64, block_rng(0, 0))
    assert full.sum() == 63 and not (full & pu).any()


@settings(max_examples=60)
@given(st.integers(0, 100), st.integers(0, 64), st.integers(0, 2**32), st.integers(0, 500))
def test_grp_properties(eta, n, seed, index):
    pu = uniform_mask(eta)
    pr = grp(pu, n, block_rng(seed, index))
    assert not (pr & pu).any()
    assert pr.sum() == min(n, 64 - pu.sum())
    assert np.array_equal(pr, grp(pu, n, block_rng(seed, index)))


def test_grp_streams_differ():
    pu = uniform_mask(0)
    draws = {grp(pu, 10, block_rng(5, i)).tobytes() for i in range(20)}
    assert len(draws) > 15
    with pytest.raises(ValueError):
        grp(pu, -1, block_rng(0, 0))


def _directional(patch):
    gx, gy = sobel(patch)
    return normalize_directions(decompose(gx, gy))


def test_nonuniform_examples():
    step = np.where(np.arange(8)[None, :] < 4, 50.0, 200.0) * np.ones((8, 1))
    d = _directional(step)
    assert not nonuniform_mask(d, "00000", 0.9).any()
    assert not nonuniform_mask(d, "11000", 1.0).any()
    edge = nonuniform_mask(d, "11000", 0.9)
    assert np.array_equal(np.flatnonzero(edge.any(axis=0)), [3, 4])
    assert edge[:, 3].all() and edge[:, 4].all()
    # tau = 0 keeps only the strictly positive magnitudes
    assert np.array_equal(nonuniform_mask(d, "11000", 0.0), edge)
    with pytest.raises(ValueError):
        nonuniform_mask(d, "1100", 0.5)


def test_nonuniform_tau_monotone(rng):
    d = _directional(rng.uniform(0, 255, (8, 8)))
    counts = [nonuniform_mask(d, "10010", t).sum() for t in np.linspace(0, 1, 11)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert counts[-1] == 0


def test_sample_patch_constant():
    pa = sample_patch(np.full((8, 8), 120.0), (0, 0))
    assert pa.eta == 0 and pa.k == 0 and pa.R_rs == 0 and pa.a == "00000"
    assert _cells(pa.M) == {(4, 4)}
    assert pa.S[3, 3] == 120.0 and np.count_nonzero(pa.S) == 1


def test_sample_patch_noise():
    img = np.random.default_rng(11).integers(0, 256, (8, 8)).astype(float)
    pa = sample_patch(img, (0, 0))
    assert pa.eta >= 70 and pa.P_u.sum() == 16
    assert 0 < pa.R_rs <= 37
    assert pa.P_r.sum() == pa.R_rs
    assert np.array_equal(pa.M, pa.P_u | pa.P_r | pa.P_n)
    assert np.array_equal(pa.S, np.where(pa.M, img, 0))


def test_sample_patch_matches_image(fixture_image):
    mask, sampled, _ = sample_image(fixture_image, SamplerConfig(seed=3))
    for origin in [(0, 0), (8, 16), (24, 24)]:
        pa = sample_patch(fixture_image, origin, SamplerConfig(seed=3))
        r, c = origin
        assert np.array_equal(pa.M, mask[r : r + 8, c : c + 8])
        assert np.array_equal(pa.S, sampled[r : r + 8, c : c + 8])


def test_sample_patch_bad_origin():
    with pytest.raises(ValueError):
        sample_patch(np.zeros((16, 16)), (3, 0))


def test_sample_image_constant():
    mask, sampled, report = sample_image(np.full((32, 32), 80.0))
    assert mask.sum() == 16 and report.rate_percent == 1.5625
    assert report.class_counts["UVL"] == 16
    assert np.array_equal(sampled, np.where(mask, 80.0, 0.0))


def test_sample_image_padded():
    img = np.full((12, 9), 80.0)
    mask, sampled, report = sample_image(img)
    assert mask.shape == sampled.shape == (12, 9)
    assert report.live == mask.sum()
    assert np.array_equal(sampled, np.where(mask, img, 0.0))
    # the interior block is constant and keeps only its centre sample
    assert _cells(mask[:8, :8]) == {(4, 4)}
    for origin in [(0, 8), (8, 0), (8, 8)]:
        r, c = origin
        pa = sample_patch(img, origin)
        assert np.array_equal(pa.M[: 12 - r, : 9 - c], mask[r:, c:][:8, :8])


def test_sample_image_deterministic_across_workers(fixture_image):
    cfg = SamplerConfig(seed=99)
    m1, s1, r1 = sample_image(fixture_image, cfg, workers=1)
    m3, s3, r3 = sample_image(fixture_image, cfg, workers=3)
    assert np.array_equal(m1, m3) and np.array_equal(s1, s3)
    assert r1.to_dict() == r3.to_dict()


def test_sample_image_rate_bounds(fixture_image):
    mask, _, report = sample_image(fixture_image)
    nb = (32 // 8) ** 2
    assert nb <= mask.sum() <= 64 * nb
    assert report.rate_percent == pytest.approx(100 * mask.mean())
    assert sum(report.class_counts.values()) == nb


def test_sample_image_seed_changes_random_part():
    img = synthetic("noise")
    m0, _, _ = sample_image(img, SamplerConfig(seed=0))
    m1, _, _ = sample_image(img, SamplerConfig(seed=1))
    assert not np.array_equal(m0, m1)
    assert m0.sum() == m1.sum()


def test_rate_grows_with_texture():
    step = np.where(np.arange(32)[None, :] < 12, 30.0, 220.0) * np.ones((32, 1))
    images = [synthetic("constant"), step, synthetic("checker"), synthetic("noise")]
    rates = [sample_image(img)[2].rate_percent for img in images]
    assert rates == sorted(rates) and rates[0] < rates[1] and rates[-1] > rates[1]


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(tau=1.5)
    with pytest.raises(ValueError):
        SamplerConfig(c=-1)


def test_random_baseline():
    assert not random_baseline_mask(16, 16, 0.0).any()
    assert random_baseline_mask(16, 16, 1.0).all()
    m = random_baseline_mask(512, 512, 0.25, seed=4)
    assert m.sum() == 65536
    assert np.array_equal(m, random_baseline_mask(512, 512, 0.25, seed=4))
    with pytest.raises(ValueError):
        random_baseline_mask(4, 4, 1.2)
