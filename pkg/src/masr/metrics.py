"""Reconstruction quality metrics and the masked AWGN measurement model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import DimensionError, as_mask

__all__ = ["MetricsReport", "NoiseConfig", "psnr", "nre", "ssim", "add_measurement_noise", "evaluate"]


def _pair(ref, est):
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        raise DimensionError(f"shape mismatch: {ref.shape} vs {est.shape}")
    return ref, est


def psnr(ref, est, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    ref, est = _pair(ref, est)
    mse = float(np.mean((ref - est) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def nre(ref, est) -> float:
    """Normalized recovery error ``||est - ref|| / ||ref||``."""
    ref, est = _pair(ref, est)
    denom = float(np.linalg.norm(ref))
    if denom == 0:
        raise ValueError("reference image is all zeros")
    return float(np.linalg.norm(est - ref)) / denom


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    p = np.arange(size) - size // 2
    g = np.exp(-(p**2) / (2 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()


def ssim(ref, est, data_range: float = 255.0, K1: float = 0.01, K2: float = 0.03) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Local statistics are computed only where the window fits inside the
    image.
    """
    ref, est = _pair(ref, est)
    win = _gaussian_window()
    pad = win.shape[0] // 2
    if min(ref.shape) < win.shape[0]:
        raise DimensionError("images must be at least 11x11 for SSIM")
    filt = lambda a: ndimage.correlate(a, win, mode="reflect")[pad:-pad, pad:-pad]  # noqa: E731
    C1 = (K1 * data_range) ** 2
    C2 = (K2 * data_range) ** 2
    mu_x, mu_y = filt(ref), filt(est)
    sxx = filt(ref * ref) - mu_x**2
    syy = filt(est * est) - mu_y**2
    sxy = filt(ref * est) - mu_x * mu_y
    num = (2 * mu_x * mu_y + C1) * (2 * sxy + C2)
    den = (mu_x**2 + mu_y**2 + C1) * (sxx + syy + C2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class NoiseConfig:
    variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be nonnegative")


def add_measurement_noise(sampled, mask, cfg: NoiseConfig) -> np.ndarray:
    """Add N(0, variance) noise at live cells of a [0, 1]-scaled sampled image.

    Noisy values are clamped to [0, 1]; dead cells are returned untouched.
    """
    img = np.asarray(sampled, dtype=np.float64)
    mask = as_mask(mask, img.shape)
    out = img.copy()
    if cfg.variance == 0:
        return out
    rng = np.random.default_rng(np.random.SeedSequence(int(cfg.seed)))
    noise = rng.normal(0.0, math.sqrt(cfg.variance), size=img.shape)
    out[mask] = np.clip(img[mask] + noise[mask], 0.0, 1.0)
    return out


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    nre: float
    sampling_rate: float


def evaluate(ref, est, mask) -> MetricsReport:
    mask = as_mask(mask)
    return MetricsReport(
        psnr=psnr(ref, est),
        ssim=ssim(ref, est),
        nre=nre(ref, est),
        sampling_rate=100.0 * np.count_nonzero(mask) / mask.size,
    )
