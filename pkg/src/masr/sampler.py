"""Measurement-adaptive sampling masks.

Each 8x8 block receives the union of

* a regular lattice chosen from its texture percentage,
* random cells placed off the lattice, counted from the sparsity of the
  texture-quantized DCT spectrum, and
* edge cells taken from the two dominant gradient directions when the
  spectrum carries a structured-edge signature.

Blocks are independent; block ``i`` draws its random cells from
``block_rng(seed, i)``, so results do not depend on processing order or
on the number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from . import gradient, spectral, texture
from .imgcore import (
    BLOCK,
    as_image,
    as_mask,
    block_rng,
    from_blocks,
    pad_to_blocks,
    to_blocks,
)

__all__ = [
    "UNIFORM_LATTICES",
    "TEXTURE_BINS",
    "SamplerConfig",
    "PatchAnalysis",
    "SamplingReport",
    "uniform_patterns",
    "uniform_mask",
    "grp",
    "nonuniform_mask",
    "sample_patch",
    "sample_image",
    "random_baseline_mask",
]

log = logging.getLogger(__name__)

# 1-based (row, col) punch positions, from very-low to very-high texture
UNIFORM_LATTICES: Mapping[str, tuple[tuple[int, int], ...]] = {
    "UVL": ((4, 4),),
    "ULT": ((3, 3), (6, 6)),
    "UBT": ((2, 2), (2, 6), (6, 2), (6, 6)),
    "UHT": ((2, 2), (2, 6), (6, 2), (6, 6), (4, 4), (4, 8), (8, 4), (8, 8)),
    "UVH": tuple((r, c) for r in (2, 4, 6, 8) for c in (2, 4, 6, 8)),
}

# lower edges of the texture classes UVL, ULT, UBT, UHT, UVH
TEXTURE_BINS = (10.0, 25.0, 45.0, 70.0)


@dataclass(frozen=True)
class SamplerConfig:
    c: float = 1.3
    d: float = 2.8
    tau: float = 0.9
    seed: int = 0
    lattices: Mapping[str, tuple[tuple[int, int], ...]] = field(
        default_factory=lambda: dict(UNIFORM_LATTICES)
    )

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        spectral.RandomRateParams(self.c, self.d)

    @property
    def rate_params(self) -> spectral.RandomRateParams:
        return spectral.RandomRateParams(self.c, self.d)


def uniform_patterns(lattices=UNIFORM_LATTICES) -> np.ndarray:
    """Stack the five lattices into a (5, 8, 8) boolean array."""
    pats = np.zeros((5, BLOCK, BLOCK), dtype=bool)
    for i, name in enumerate(("UVL", "ULT", "UBT", "UHT", "UVH")):
        for r, c in lattices[name]:
            pats[i, r - 1, c - 1] = True
    return pats


_DEFAULT_PATTERNS = uniform_patterns()
_DEFAULT_PATTERNS.setflags(write=False)


def _texture_class(eta) -> np.ndarray:
    eta = np.asarray(eta, dtype=np.float64)
    if np.any(eta < 0) or np.any(eta > 100):
        raise ValueError("texture must lie in [0, 100]")
    return np.searchsorted(TEXTURE_BINS, eta, side="right")


def uniform_mask(eta, patterns: np.ndarray = _DEFAULT_PATTERNS) -> np.ndarray:
    """Regular lattice for texture percentage ``eta`` (scalar or array)."""
    return patterns[_texture_class(eta)].copy()


def grp(P_u, R_rs: int, rng: np.random.Generator) -> np.ndarray:
    """Graduated randomization: ``R_rs`` random cells off the lattice ``P_u``.

    The count is truncated to the number of free cells; free locations are
    shuffled and then drawn without replacement.
    """
    P_u = as_mask(P_u, (BLOCK, BLOCK))
    if R_rs < 0:
        raise ValueError("random rate must be nonnegative")
    free = np.flatnonzero(~P_u)
    n = min(int(R_rs), free.size)
    P_r = np.zeros(BLOCK * BLOCK, dtype=bool)
    if n:
        free = rng.permutation(free)
        P_r[free[rng.choice(free.size, size=n, replace=False)]] = True
    return P_r.reshape(BLOCK, BLOCK)


def _nonuniform(directional: np.ndarray, signature: np.ndarray, tau: float) -> np.ndarray:
    # directional: (nb, 8, 8, 8) normalized; signature: (nb,) bool
    sums = directional.sum(axis=(-2, -1))
    # stable descending order; ties keep the lower direction index first
    top = np.argsort(-sums, axis=-1, kind="stable")[:, :2]
    picked = np.take_along_axis(directional, top[:, :, None, None], axis=1)
    mag = gradient.minmax_normalize(np.sqrt((picked**2).sum(axis=1)))
    return (mag > tau) & signature[:, None, None]


def nonuniform_mask(directional, a: str, tau: float) -> np.ndarray:
    """Edge-sample mask for one patch.

    ``directional`` holds the eight normalized direction grids, ``a`` the
    five-bit edge string. Only structured-edge strings yield samples: cells
    where the renormalized magnitude of the two strongest directions is
    strictly above ``tau``.
    """
    if len(a) != 5 or set(a) - {"0", "1"}:
        raise ValueError(f"edge string must be 5 binary digits, got {a!r}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    d = np.asarray(directional, dtype=np.float64)[None]
    return _nonuniform(d, np.array([a in spectral.EDGE_SIGNATURES]), tau)[0]


@dataclass
class PatchAnalysis:
    """Intermediates of adaptive sampling for one block (for audit)."""

    index: int
    origin: tuple[int, int]
    eta: float
    k: int
    R_rs: int
    a: str
    P_u: np.ndarray
    P_r: np.ndarray
    P_n: np.ndarray
    M: np.ndarray
    S: np.ndarray


@dataclass
class _BlockBatch:
    eta: np.ndarray
    k: np.ndarray
    R_rs: np.ndarray
    bits: np.ndarray
    P_u: np.ndarray
    P_r: np.ndarray
    P_n: np.ndarray


def _analyze(blocks, gx, gy, indices, cfg: SamplerConfig, patterns) -> _BlockBatch:
    eta = texture.patch_texture(blocks)
    eta = np.atleast_1d(eta)
    P_u = uniform_mask(eta, patterns)

    textured = eta >= spectral.ETA_EPS
    coeffs = np.zeros(blocks.shape, dtype=np.int64)
    if np.any(textured):
        table = spectral.quant_table(eta[textured])
        coeffs[textured] = spectral.quantize(spectral.dct2(blocks[textured]), table).coeffs
    k = np.count_nonzero(coeffs, axis=(-2, -1))
    R_rs = np.atleast_1d(spectral.random_rate(k, cfg.rate_params))

    P_r = np.stack([grp(P_u[j], R_rs[j], block_rng(cfg.seed, i)) for j, i in enumerate(indices)])

    bits = spectral.region_bits(coeffs)
    sig = np.array(["".join("1" if b else "0" for b in row) in spectral.EDGE_SIGNATURES for row in bits])
    P_n = np.zeros_like(P_u)
    if np.any(sig):
        directional = gradient.normalize_directions(gradient.decompose(gx[sig], gy[sig]))
        P_n[sig] = _nonuniform(directional, np.ones(int(sig.sum()), dtype=bool), cfg.tau)
    return _BlockBatch(eta, k, R_rs, bits, P_u, P_r, P_n)


def _prepare(img):
    img = as_image(img)
    padded, valid = pad_to_blocks(img)
    gx, gy = gradient.sobel(img)
    gx, _ = pad_to_blocks(gx)
    gy, _ = pad_to_blocks(gy)
    return img, padded, valid, gx, gy


def sample_patch(img, origin: tuple[int, int], cfg: SamplerConfig = SamplerConfig()) -> PatchAnalysis:
    """Run adaptive sampling on the block of ``img`` at ``origin``.

    The image supplies the gradient border and the block index that keys
    the random stream, so the result matches the same block inside
    :func:`sample_image`.
    """
    img, padded, valid, gx, gy = _prepare(img)
    r, c = origin
    if r % BLOCK or c % BLOCK or not (0 <= r < padded.shape[0] and 0 <= c < padded.shape[1]):
        raise ValueError(f"origin {origin} is not on the block grid")
    index = (r // BLOCK) * (padded.shape[1] // BLOCK) + c // BLOCK
    win = np.s_[r : r + BLOCK, c : c + BLOCK]
    block = padded[win]
    batch = _analyze(block[None], gx[win][None], gy[win][None], [index], cfg, uniform_patterns(cfg.lattices))
    M = (batch.P_u[0] | batch.P_r[0] | batch.P_n[0]) & valid[win]
    return PatchAnalysis(
        index=index,
        origin=(r, c),
        eta=float(batch.eta[0]),
        k=int(batch.k[0]),
        R_rs=int(batch.R_rs[0]),
        a="".join("1" if b else "0" for b in batch.bits[0]),
        P_u=batch.P_u[0],
        P_r=batch.P_r[0],
        P_n=batch.P_n[0],
        M=M,
        S=np.where(M, block, 0.0),
    )


@dataclass
class SamplingReport:
    height: int
    width: int
    live: int
    rate_percent: float
    seed: int
    eta_hist: list[int]
    k_hist: list[int]
    rrs_hist: list[int]
    class_counts: dict[str, int]

    def to_dict(self) -> dict:
        return asdict(self)


def sample_image(img, cfg: SamplerConfig = SamplerConfig(), workers: int = 1):
    """Adaptively sample a whole image.

    Returns ``(mask, sampled, report)`` where ``sampled`` is the Hadamard
    product of the image with ``mask``.
    """
    img, padded, valid, gx, gy = _prepare(img)
    h, w = img.shape
    blocks = to_blocks(padded)
    gxb, gyb = to_blocks(gx), to_blocks(gy)
    nb = len(blocks)
    patterns = uniform_patterns(cfg.lattices)

    chunks = np.array_split(np.arange(nb), max(1, min(int(workers), nb)))
    run = lambda idx: _analyze(blocks[idx], gxb[idx], gyb[idx], idx, cfg, patterns)  # noqa: E731
    if len(chunks) == 1:
        parts = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts])  # noqa: E731
    eta, k, R_rs = cat("eta"), cat("k"), cat("R_rs")
    M = cat("P_u") | cat("P_r") | cat("P_n")

    mask = (from_blocks(M, padded.shape) & valid)[:h, :w]
    sampled = np.where(mask, img, 0.0)
    live = int(np.count_nonzero(mask))
    classes = np.bincount(_texture_class(eta), minlength=5)
    report = SamplingReport(
        height=h,
        width=w,
        live=live,
        rate_percent=100.0 * live / (h * w),
        seed=int(cfg.seed),
        eta_hist=np.histogram(eta, bins=10, range=(0, 100))[0].tolist(),
        k_hist=np.bincount(k, minlength=65).tolist(),
        rrs_hist=np.bincount(R_rs, minlength=38).tolist(),
        class_counts=dict(zip(("UVL", "ULT", "UBT", "UHT", "UVH"), classes.tolist())),
    )
    log.debug("sampled %dx%d image at %.2f%%", h, w, report.rate_percent)
    return mask, sampled, report


def random_baseline_mask(h: int, w: int, rate: float, seed: int = 0) -> np.ndarray:
    """Pure random mask with round(rate * h * w) live cells."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    n = int(spectral.round_half_away(rate * h * w))
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    mask = np.zeros(h * w, dtype=bool)
    mask[rng.choice(h * w, size=n, replace=False)] = True
    return mask.reshape(h, w)
