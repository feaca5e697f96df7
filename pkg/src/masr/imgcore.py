"""Image and mask containers, 8x8 block tiling, and PGM/PBM file I/O.

Images are 2-D ``float64`` arrays with values in [0, 255]; masks are 2-D
``bool`` arrays where ``True`` marks a live (sampled) cell.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BLOCK",
    "DimensionError",
    "FormatError",
    "Patch",
    "as_image",
    "as_mask",
    "pad_to_blocks",
    "to_blocks",
    "from_blocks",
    "tile_image",
    "union_masks",
    "subsample",
    "assemble_mask",
    "sampling_rate",
    "block_rng",
    "read_pgm",
    "write_pgm",
    "read_pbm",
    "write_pbm",
]

BLOCK = 8


class DimensionError(ValueError):
    """Raised when two grids that must share a shape do not."""


class FormatError(ValueError):
    """Raised for malformed or unsupported image files."""


@dataclass(frozen=True)
class Patch:
    """One 8x8 tile of an image.

    ``valid`` is False on cells that lie outside the parent image (zero
    padding); those cells never enter an output mask.
    """

    values: np.ndarray
    origin: tuple[int, int]
    valid: np.ndarray

    def __post_init__(self):
        if self.values.shape != (BLOCK, BLOCK) or self.valid.shape != (BLOCK, BLOCK):
            raise DimensionError(f"patch must be {BLOCK}x{BLOCK}")


def as_image(pixels) -> np.ndarray:
    """Validate and widen ``pixels`` to a float64 grayscale image."""
    img = np.array(pixels, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise DimensionError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("image values must lie in [0, 255]")
    return img


def as_mask(bits, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Validate ``bits`` as a binary mask, optionally against ``shape``."""
    arr = np.asarray(bits)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D mask, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask entries must be 0 or 1")
        arr = arr.astype(bool)
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionError(f"mask shape {arr.shape} does not match {tuple(shape)}")
    return arr


def pad_to_blocks(arr: np.ndarray, fill=0) -> tuple[np.ndarray, np.ndarray]:
    """Zero-pad ``arr`` up to multiples of 8 on both axes.

    Returns the padded array and a boolean grid that is True on original
    (non-padding) cells.
    """
    h, w = arr.shape
    H = -(-h // BLOCK) * BLOCK
    W = -(-w // BLOCK) * BLOCK
    padded = np.full((H, W), fill, dtype=arr.dtype)
    padded[:h, :w] = arr
    valid = np.zeros((H, W), dtype=bool)
    valid[:h, :w] = True
    return padded, valid


def to_blocks(arr: np.ndarray) -> np.ndarray:
    """Reshape an (H, W) array with H, W multiples of 8 into (nb, 8, 8), row-major."""
    H, W = arr.shape
    return (
        arr.reshape(H // BLOCK, BLOCK, W // BLOCK, BLOCK)
        .swapaxes(1, 2)
        .reshape(-1, BLOCK, BLOCK)
    )


def from_blocks(blocks: np.ndarray, padded_shape: tuple[int, int]) -> np.ndarray:
    """Inverse of :func:`to_blocks`."""
    H, W = padded_shape
    return (
        blocks.reshape(H // BLOCK, W // BLOCK, BLOCK, BLOCK)
        .swapaxes(1, 2)
        .reshape(H, W)
    )


def tile_image(img) -> list[Patch]:
    """Split an image into row-major 8x8 patches, zero-padding the boundary."""
    img = as_image(img)
    padded, valid = pad_to_blocks(img)
    nbx = padded.shape[1] // BLOCK
    vals = to_blocks(padded)
    flags = to_blocks(valid)
    return [
        Patch(vals[i].copy(), ((i // nbx) * BLOCK, (i % nbx) * BLOCK), flags[i].copy())
        for i in range(len(vals))
    ]


def union_masks(masks: Iterable) -> np.ndarray:
    """Elementwise logical OR of equally shaped masks."""
    masks = [as_mask(m) for m in masks]
    if not masks:
        raise ValueError("union of zero masks is undefined")
    shape = masks[0].shape
    out = np.zeros(shape, dtype=bool)
    for m in masks:
        if m.shape != shape:
            raise DimensionError(f"mask shape {m.shape} does not match {shape}")
        out |= m
    return out


def subsample(img, mask) -> np.ndarray:
    """Hadamard product of an image with a binary mask."""
    img = np.asarray(img, dtype=np.float64)
    mask = as_mask(mask, img.shape)
    return np.where(mask, img, 0.0)


def assemble_mask(
    patch_masks: Sequence[tuple[np.ndarray, tuple[int, int]]],
    shape: tuple[int, int],
) -> np.ndarray:
    """Place 8x8 patch masks at their origins in an ``shape`` grid.

    Cells that fall outside the image (padding) are dropped.
    """
    h, w = shape
    H = -(-h // BLOCK) * BLOCK
    W = -(-w // BLOCK) * BLOCK
    out = np.zeros((H, W), dtype=bool)
    seen = set()
    for m, (r, c) in patch_masks:
        m = as_mask(m, (BLOCK, BLOCK))
        if r % BLOCK or c % BLOCK or not (0 <= r < H and 0 <= c < W):
            raise ValueError(f"origin {(r, c)} is not on the block grid of {shape}")
        if (r, c) in seen:
            raise ValueError(f"overlapping patch origin {(r, c)}")
        seen.add((r, c))
        out[r : r + BLOCK, c : c + BLOCK] = m
    return out[:h, :w].copy()


def sampling_rate(mask) -> float:
    """Fraction of live cells in ``mask``."""
    mask = as_mask(mask)
    return float(np.count_nonzero(mask)) / mask.size


def block_rng(seed: int, index: int) -> np.random.Generator:
    """Independent random stream for block ``index`` under ``seed``.

    Streams depend only on (seed, index), so blocks can be processed in any
    order or in parallel with identical results.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


# --- Netpbm I/O -------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens = []
    pos = 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def _positive_int(tok: bytes, what: str) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise FormatError(f"invalid {what}: {tok!r}") from None
    if v <= 0:
        raise FormatError(f"invalid {what}: {v}")
    return v


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a float64 image."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _header(data, 4)
    if magic != b"P5":
        raise FormatError(f"not a binary PGM (magic {magic!r})")
    w = _positive_int(w, "width")
    h = _positive_int(h, "height")
    if _positive_int(maxval, "maxval") != 255:
        raise FormatError("only maxval 255 is supported")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after header")
    raster = data[pos + 1 : pos + 1 + w * h]
    if len(raster) != w * h:
        raise FormatError(f"expected {w * h} pixel bytes, got {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).astype(np.float64)


def write_pgm(path, img) -> None:
    """Write an image as binary PGM, rounding to nearest and clamping to [0, 255]."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionError("PGM images must be 2-D")
    # round half away from zero
    px = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    h, w = px.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + px.tobytes())


def read_pbm(path) -> np.ndarray:
    """Read a plain (P1) PBM file as a boolean mask (1 = live)."""
    data = Path(path).read_bytes()
    (magic, w, h), pos = _header(data, 3)
    if magic != b"P1":
        raise FormatError(f"not a plain PBM (magic {magic!r})")
    w = _positive_int(w, "width")
    h = _positive_int(h, "height")
    body = re.sub(rb"#[^\n]*", b"", data[pos:])
    bits = re.sub(rb"\s+", b"", body)
    if len(bits) != w * h or bits.strip(b"01"):
        raise FormatError("PBM raster must hold exactly width*height 0/1 digits")
    return (np.frombuffer(bits, dtype=np.uint8) == ord("1")).reshape(h, w)


def write_pbm(path, mask) -> None:
    """Write a mask as plain PBM (P1)."""
    mask = as_mask(mask)
    h, w = mask.shape
    lines = []
    for row in mask:
        digits = "".join("1" if b else "0" for b in row)
        # netpbm caps plain-format lines at 70 characters
        lines.extend(digits[i : i + 70] for i in range(0, len(digits), 70))
    Path(path).write_text(f"P1\n{w} {h}\n" + "\n".join(lines) + "\n")
