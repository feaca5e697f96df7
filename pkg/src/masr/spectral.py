"""Block DCT, texture-driven IJG quantization, sparsity and random-rate estimation.

Indices are 0-based in code; the frequency-region geometry below is written
for 1-based (row, col) modes with (1, 1) the DC term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .imgcore import BLOCK

__all__ = [
    "ETA_EPS",
    "Q_REF",
    "REGION_OF",
    "REGION_NAMES",
    "EDGE_SIGNATURES",
    "QuantizedSpectrum",
    "RandomRateParams",
    "dct_kernel",
    "dct2",
    "idct2",
    "round_half_away",
    "scaling_factor",
    "quant_table",
    "quantize",
    "random_rate",
    "region_bits",
    "classify_regions",
]

# IJG luminance table at quality 50
Q_REF = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

# Below this texture the scaling factor 5000/eta is meaningless; such
# patches skip quantization and report zero sparsity.
ETA_EPS = 0.5


def dct_kernel(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II matrix ``T`` so that the 2-D transform is ``T @ R @ T.T``."""
    u = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    T = np.cos((2 * x + 1) * u * np.pi / (2 * n)) * np.sqrt(2.0 / n)
    T[0] /= np.sqrt(2.0)
    return T


_T = dct_kernel()
_T.setflags(write=False)


def dct2(values) -> np.ndarray:
    """2-D orthonormal DCT of a patch or a (..., 8, 8) stack."""
    return _T @ np.asarray(values, dtype=np.float64) @ _T.T


def idct2(spectrum) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    return _T.T @ np.asarray(spectrum, dtype=np.float64) @ _T


def round_half_away(x) -> np.ndarray:
    """Nearest integer with ties away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def scaling_factor(eta):
    """IJG quality scaling with texture in place of the quality setting."""
    eta = np.asarray(eta, dtype=np.float64)
    if np.any(eta <= 0) or np.any(eta > 100):
        raise ValueError("texture must lie in (0, 100]")
    with np.errstate(divide="ignore"):
        s = np.where(eta < 50, 5000.0 / eta, 2.0 * (100.0 - eta))
    return float(s) if s.ndim == 0 else s


def quant_table(eta) -> np.ndarray:
    """Quantization table for texture ``eta``; shape (8, 8) or (..., 8, 8).

    Entries are ``max(floor(s/100 * Q_REF + 1/2), 1)``.
    """
    s = np.asarray(scaling_factor(eta))[..., None, None]
    q = np.floor(s / 100.0 * Q_REF + 0.5)
    return np.maximum(q, 1).astype(np.int64)


class QuantizedSpectrum(NamedTuple):
    coeffs: np.ndarray
    k: int | np.ndarray


def quantize(spectrum, table) -> QuantizedSpectrum:
    """Divide entrywise by ``table``, round to nearest, and count nonzeros."""
    table = np.asarray(table)
    if np.any(table < 1):
        raise ValueError("quantization table entries must be >= 1")
    coeffs = round_half_away(np.asarray(spectrum, dtype=np.float64) / table).astype(np.int64)
    k = np.count_nonzero(coeffs, axis=(-2, -1))
    return QuantizedSpectrum(coeffs, int(k) if np.ndim(k) == 0 else k)


@dataclass(frozen=True)
class RandomRateParams:
    c: float = 1.3
    d: float = 2.8
    n: int = BLOCK * BLOCK

    def __post_init__(self):
        if self.c <= 0 or self.d < 1 or self.n != BLOCK * BLOCK:
            raise ValueError(f"invalid random-rate parameters {self}")


def random_rate(k, params: RandomRateParams = RandomRateParams()):
    """Number of random samples for sparsity ``k``: round(c k log10(d n / k)), 0 at k = 0."""
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 0) or np.any(k > params.n):
        raise ValueError(f"sparsity must lie in [0, {params.n}]")
    safe = np.where(k > 0, k, 1.0)
    r = np.where(k > 0, round_half_away(params.c * safe * np.log10(params.d * params.n / safe)), 0)
    r = np.maximum(r, 0).astype(np.int64)
    return int(r) if r.ndim == 0 else r


def _build_regions() -> np.ndarray:
    region = np.full((BLOCK, BLOCK), 5, dtype=np.int64)
    for i in range(1, BLOCK + 1):
        for j in range(1, BLOCK + 1):
            if (i, j) == (1, 1):
                r = 0
            elif i + j <= 4:
                r = 1
            elif i <= 2 and j >= 4:
                r = 2
            elif j <= 2 and i >= 4:
                r = 3
            elif abs(i - j) <= 1 and i + j >= 5 and i <= 6 and j <= 6:
                r = 4
            else:
                r = 5
            region[i - 1, j - 1] = r
    region.setflags(write=False)
    return region


# 0 = DC, 1..5 = low, horizontal, vertical, diagonal, high frequency bands
REGION_OF = _build_regions()
REGION_NAMES = ("D", "S1", "S2", "S3", "S4", "S5")

# vertical, horizontal, diagonal, vertical-diagonal, horizontal-diagonal
EDGE_SIGNATURES = frozenset({"11000", "10100", "10010", "11010", "10110"})


def region_bits(coeffs) -> np.ndarray:
    """Boolean (..., 5): whether each AC region holds a nonzero coefficient."""
    nz = np.asarray(coeffs) != 0
    return np.stack([np.any(nz & (REGION_OF == s), axis=(-2, -1)) for s in range(1, 6)], axis=-1)


def classify_regions(coeffs) -> str:
    """Edge-structure string ``a1..a5`` for one quantized spectrum."""
    return "".join("1" if b else "0" for b in region_bits(coeffs))
