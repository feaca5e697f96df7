"""Cellular-automaton recovery of scattered samples.

Dead cells are revived generation by generation with a Gaussian-weighted
mean of the live cells inside a growing square window (3x3, 5x5, 7x7, ...).
Each generation reads only the previous generation's mask and image, so the
update is synchronous and independent of scan order. Borders replicate the
nearest edge cell.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import ndimage

from .imgcore import as_mask
from .spectral import round_half_away

__all__ = [
    "CaState",
    "PostprocessConfig",
    "Recovery",
    "gaussian_kernel",
    "initial_state",
    "ca_generation",
    "recover",
    "postprocess",
    "convergence_probe",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaState:
    mask: np.ndarray
    image: np.ndarray
    initial_mask: np.ndarray
    omega: int = 3
    sigma: float = 1.0
    zeta: float = 1.05
    generation: int = 0

    @property
    def dead(self) -> int:
        return int(self.mask.size - np.count_nonzero(self.mask))


@dataclass(frozen=True)
class PostprocessConfig:
    rho: float = 0.3
    omega_f: int = 3
    sigma_f: float = 1.5

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if self.omega_f < 1 or self.omega_f % 2 == 0:
            raise ValueError("omega_f must be a positive odd integer")
        if self.sigma_f <= 0:
            raise ValueError("sigma_f must be positive")


class Recovery(NamedTuple):
    image: np.ndarray
    generations: int


def gaussian_kernel(omega: int, sigma: float) -> np.ndarray:
    """Unnormalized ``omega`` x ``omega`` Gaussian centred on the middle cell."""
    if omega < 1 or omega % 2 == 0:
        raise ValueError("window side must be a positive odd integer")
    half = omega // 2
    p = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-(p[:, None] ** 2 + p[None, :] ** 2) / (2.0 * sigma**2))


def initial_state(mask, sampled, zeta: float = 1.05) -> CaState:
    sampled = np.asarray(sampled, dtype=np.float64)
    if sampled.ndim != 2:
        raise ValueError("sampled image must be 2-D")
    mask = as_mask(mask, sampled.shape)
    if zeta < 1:
        raise ValueError("zeta must be >= 1")
    return CaState(mask.copy(), sampled.copy(), mask.copy(), zeta=zeta)


def _window_sums(mask: np.ndarray, image: np.ndarray, weights: np.ndarray):
    # The weighted mean is taken as lo + sum(w * (x - lo)) / sum(w), with lo the
    # smallest live value in the window, so equal neighbours give their value
    # exactly. Sums run in row-major (p, q) window order; dead cells add zeros.
    half = weights.shape[0] // 2
    h, w = mask.shape
    m = np.pad(mask, half, mode="edge")
    x = np.pad(np.where(mask, image, np.inf), half, mode="edge")
    lo = np.full((h, w), np.inf)
    for i in range(weights.shape[0]):
        for j in range(weights.shape[1]):
            np.minimum(lo, x[i : i + h, j : j + w], out=lo)
    hit = np.isfinite(lo)
    base = np.where(hit, lo, 0.0)
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    for i in range(weights.shape[0]):
        for j in range(weights.shape[1]):
            wt = weights[i, j]
            ms = m[i : i + h, j : j + w]
            num += wt * np.where(ms, x[i : i + h, j : j + w] - base, 0.0)
            den += wt * ms
    return base, num, den, hit


def ca_generation(state: CaState) -> CaState:
    """One synchronous generation; returns the next state."""
    weights = gaussian_kernel(state.omega, state.sigma)
    base, num, den, hit = _window_sums(state.mask, state.image, weights)
    revive = hit & ~state.mask
    image = state.image.copy()
    image[revive] = base[revive] + num[revive] / den[revive]
    return replace(
        state,
        mask=state.mask | revive,
        image=image,
        omega=state.omega + 2,
        sigma=state.zeta * state.sigma,
        generation=state.generation + 1,
    )


def recover(
    mask,
    sampled,
    zeta: float = 1.05,
    on_generation: Callable[[CaState], None] | None = None,
) -> Recovery:
    """Fill every dead cell of ``sampled``.

    Live cells keep their values. ``on_generation`` is called with the state
    after each generation.

    Raises
    ------
    ValueError
        If the mask has no live cell.
    """
    state = initial_state(mask, sampled, zeta)
    if not state.mask.any():
        raise ValueError("mask has no live cells; nothing to propagate")
    while state.dead:
        state = ca_generation(state)
        log.debug("generation %d: %d dead cells left", state.generation, state.dead)
        if on_generation is not None:
            on_generation(state)
    return Recovery(state.image, state.generation)


def postprocess(recovered, initial_mask, cfg: PostprocessConfig = PostprocessConfig()) -> np.ndarray:
    """Smooth pixels whose window holds too few initial samples.

    A pixel is replaced by the normalized Gaussian mean of ``recovered`` over
    its ``omega_f`` window when that window holds fewer than
    ``round(rho * omega_f**2)`` initially live cells. All reads come from the
    unmodified input.
    """
    img = np.asarray(recovered, dtype=np.float64)
    m0 = as_mask(initial_mask, img.shape)
    threshold = int(round_half_away(cfg.rho * cfg.omega_f**2))
    if threshold == 0:
        return img.copy()
    box = np.ones((cfg.omega_f, cfg.omega_f))
    counts = ndimage.correlate(m0.astype(np.float64), box, mode="nearest")
    kernel = gaussian_kernel(cfg.omega_f, cfg.sigma_f)
    smooth = ndimage.correlate(img, kernel / kernel.sum(), mode="nearest")
    return np.where(counts < threshold, smooth, img)


def convergence_probe(mask) -> int:
    """Upper bound on the number of generations needed to fill ``mask``.

    Generation ``g`` reaches ``g`` cells further, so after ``g`` generations
    every cell within Chebyshev distance ``1 + 2 + ... + g`` of an initial
    sample is live.
    """
    mask = as_mask(mask)
    if not mask.any():
        raise ValueError("mask has no live cells")
    if mask.all():
        return 0
    far = int(ndimage.distance_transform_cdt(~mask, metric="chessboard").max())
    g = 0
    while g * (g + 1) // 2 < far:
        g += 1
    return g
