"""Patch texture percentage from the joint entropy of a gray-level co-occurrence matrix.

All functions accept a single 8x8 patch or a stack of shape (..., 8, 8).
"""

from __future__ import annotations

import numpy as np

__all__ = ["LEVELS", "H_MAX", "scale_patch", "cooccurrence", "texture_eta", "patch_texture"]

LEVELS = 8
# entropy of the uniform PMF over LEVELS**2 bins
H_MAX = np.log2(LEVELS * LEVELS)


def scale_patch(values) -> np.ndarray:
    """Quantize [0, 255] luminance into gray levels 1..8 with equal-width bins."""
    v = np.asarray(values, dtype=np.float64)
    return np.minimum(LEVELS, np.floor(v / (256 / LEVELS)).astype(np.int64) + 1)


def cooccurrence(levels) -> np.ndarray:
    """Normalized co-occurrence matrix of horizontally adjacent gray levels.

    Entry ``[..., i-1, j-1]`` is the fraction of pairs (g[r, c], g[r, c+1])
    equal to (i, j).
    """
    g = np.asarray(levels, dtype=np.int64)
    lead = g.shape[:-2]
    pairs = (g[..., :, :-1] - 1) * LEVELS + (g[..., :, 1:] - 1)
    pairs = pairs.reshape(-1, pairs.shape[-2] * pairs.shape[-1])
    n = pairs.shape[0]
    offsets = np.arange(n)[:, None] * LEVELS * LEVELS
    counts = np.bincount((pairs + offsets).ravel(), minlength=n * LEVELS * LEVELS)
    probs = counts.reshape(n, LEVELS, LEVELS) / pairs.shape[1]
    return probs.reshape(*lead, LEVELS, LEVELS)


def texture_eta(probs) -> np.ndarray | float:
    """Texture percentage: co-occurrence joint entropy scaled to [0, 100]."""
    p = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    eta = np.clip(100.0 / H_MAX * terms.sum(axis=(-2, -1)), 0.0, 100.0)
    return float(eta) if eta.ndim == 0 else eta


def patch_texture(values):
    """Texture percentage of one patch or a stack of patches."""
    return texture_eta(cooccurrence(scale_patch(values)))
