"""Sobel gradients and their eight-direction decomposition.

Directions are indexed 0..7 in the order N, NW, W, SW, S, SE, E, NE
(counter-clockwise). A gradient ``(gx, gy)`` is read with ``gx`` along N and
``gy`` along E, so each vector splits onto one cardinal and one adjacent
ordinal direction.
"""

from __future__ import annotations

import numpy as np

from .imgcore import BLOCK, as_image

__all__ = [
    "DIRECTIONS",
    "sobel",
    "sobel_with_border",
    "decompose",
    "minmax_normalize",
    "normalize_directions",
]

DIRECTIONS = ("N", "NW", "W", "SW", "S", "SE", "E", "NE")
N, NW, W, SW, S, SE, E, NE = range(8)


def _sobel_padded(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # p carries a one-pixel border; x runs along columns, y along rows
    gx = (
        (p[:-2, 2:] - p[:-2, :-2])
        + 2 * (p[1:-1, 2:] - p[1:-1, :-2])
        + (p[2:, 2:] - p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] - p[:-2, :-2])
        + 2 * (p[2:, 1:-1] - p[:-2, 1:-1])
        + (p[2:, 2:] - p[:-2, 2:])
    )
    return gx, gy


def sobel(img) -> tuple[np.ndarray, np.ndarray]:
    """Sobel derivatives of a whole image with replicated borders."""
    img = as_image(img)
    return _sobel_padded(np.pad(img, 1, mode="edge"))


def sobel_with_border(img, origin: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Sobel derivatives over the 8x8 patch at ``origin``.

    The 3x3 stencil reads pixels from neighbouring patches; outside the image
    the nearest edge pixel is replicated. Patch cells beyond the image
    (zero padding) get a zero gradient.
    """
    img = as_image(img)
    h, w = img.shape
    r0, c0 = origin
    rows = np.clip(np.arange(r0 - 1, r0 + BLOCK + 1), 0, h - 1)
    cols = np.clip(np.arange(c0 - 1, c0 + BLOCK + 1), 0, w - 1)
    gx, gy = _sobel_padded(img[np.ix_(rows, cols)])
    outside = (np.arange(r0, r0 + BLOCK)[:, None] >= h) | (np.arange(c0, c0 + BLOCK)[None, :] >= w)
    gx[outside] = 0.0
    gy[outside] = 0.0
    return gx, gy


def decompose(gx, gy) -> np.ndarray:
    """Split gradients onto eight directions.

    Returns an array of shape ``gx.shape[:-2] + (8,) + gx.shape[-2:]``. Per
    pixel the cardinal slot receives ``| |gx| - |gy| | / |g|`` and the
    adjacent ordinal slot ``sqrt(2) min(|gx|, |gy|) / |g|``; both are zero
    where the gradient vanishes.
    """
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    ax, ay = np.abs(gx), np.abs(gy)
    norm = np.hypot(gx, gy)
    safe = np.where(norm > 0, norm, 1.0)
    a1 = np.where(norm > 0, np.abs(ax - ay) / safe, 0.0)
    a2 = np.where(norm > 0, np.sqrt(2.0) * np.minimum(ax, ay) / safe, 0.0)

    x_dom = ay <= ax
    cardinal = np.where(
        x_dom,
        np.where(gx >= 0, N, S),
        np.where(gy >= 0, E, W),
    )
    ordinal = np.where(
        gx >= 0,
        np.where(gy >= 0, NE, NW),
        np.where(gy >= 0, SE, SW),
    )

    out = np.zeros(gx.shape[:-2] + (8,) + gx.shape[-2:])
    axis = gx.ndim - 2
    np.put_along_axis(out, np.expand_dims(cardinal, axis), np.expand_dims(a1, axis), axis=axis)
    np.put_along_axis(out, np.expand_dims(ordinal, axis), np.expand_dims(a2, axis), axis=axis)
    return out


def minmax_normalize(grid) -> np.ndarray:
    """Min-max scale the trailing 2-D grid(s) to [0, 1].

    A grid with zero range becomes all ones if it is nonzero and stays all
    zeros otherwise.
    """
    g = np.asarray(grid, dtype=np.float64)
    lo = g.min(axis=(-2, -1), keepdims=True)
    hi = g.max(axis=(-2, -1), keepdims=True)
    span = hi - lo
    scaled = (g - lo) / np.where(span > 0, span, 1.0)
    flat = np.where(hi != 0, 1.0, 0.0) * np.ones_like(g)
    return np.where(span > 0, scaled, flat)


def normalize_directions(directional) -> np.ndarray:
    """Normalize each of the eight direction grids independently."""
    return minmax_normalize(directional)
