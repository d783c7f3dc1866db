"""Feature extraction from pre-cropped grayscale images.

Two extractors are provided: raw pixels (resize, flatten, scale to [0, 1])
and an orientation-histogram descriptor with block L2-Hys normalization.
Training-time augmentation mirrors images across the y-axis and shifts
brightness / contrast; gallery and probe images are used unaugmented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, ImageFormatError, IllPosedError


def as_gray_image(img) -> np.ndarray:
    """Validate an image as a non-empty 2-D uint8 array (row-major pixels)."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ImageFormatError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ImageFormatError(f"expected 8-bit intensities, got dtype {arr.dtype}")
        if arr.min() < 0 or arr.max() > 255:
            raise ImageFormatError("intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


@dataclass(frozen=True)
class HogParams:
    """Descriptor layout: square cells, overlapping square blocks of cells."""

    cell_size: int = 8
    block_size: int = 2
    block_stride: int = 1
    orientation_bins: int = 9
    clip: float = 0.2
    canonical_size: int = 64

    def __post_init__(self):
        for name in ("cell_size", "block_size", "block_stride",
                     "orientation_bins", "canonical_size"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise IllPosedError(f"{name} must be a positive integer, got {value!r}")
        if not np.isfinite(self.clip) or self.clip <= 0:
            raise IllPosedError(f"clip must be positive, got {self.clip!r}")
        if self.canonical_size % self.cell_size != 0:
            raise DimensionError(
                f"canonical_size {self.canonical_size} not divisible by "
                f"cell_size {self.cell_size}"
            )

    @property
    def cells_per_side(self) -> int:
        return self.canonical_size // self.cell_size

    @property
    def blocks_per_side(self) -> int:
        span = self.cells_per_side - self.block_size
        if span < 0:
            raise DimensionError(
                f"block_size {self.block_size} exceeds {self.cells_per_side} cells per side"
            )
        return span // self.block_stride + 1

    @property
    def descriptor_length(self) -> int:
        return (self.blocks_per_side ** 2
                * self.block_size ** 2
                * self.orientation_bins)


@dataclass(frozen=True)
class AugmentationPolicy:
    """Cross product of {original, y-mirror} x {identity, brightness, contrast}."""

    flip: bool = True
    brightness_deltas: tuple[int, ...] = (25, -25)
    contrast_factors: tuple[float, ...] = (1.25, 0.8)

    @property
    def variant_count(self) -> int:
        photometric = 1 + len(self.brightness_deltas) + len(self.contrast_factors)
        return (2 if self.flip else 1) * photometric


def resize_to_canonical(img, size: int) -> np.ndarray:
    """Bilinear resize to ``size x size`` (corner-aligned sampling grid)."""
    arr = as_gray_image(img)
    if size < 1:
        raise DimensionError(f"canonical size must be positive, got {size}")
    h, w = arr.shape
    if (h, w) == (size, size):
        return arr.copy()
    src = arr.astype(np.float64)
    ys = np.linspace(0.0, h - 1.0, size)
    xs = np.linspace(0.0, w - 1.0, size)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = src[np.ix_(y0, x0)] * (1.0 - fx) + src[np.ix_(y0, x1)] * fx
    bottom = src[np.ix_(y1, x0)] * (1.0 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1.0 - fy) + bottom * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def extract_raw(img, size: int = 64) -> np.ndarray:
    """Resize, flatten row-major, and scale intensities to [0, 1]."""
    canon = resize_to_canonical(img, size)
    return canon.astype(np.float64).ravel() / 255.0


def _centered_gradients(intens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # (-1, 0, 1) differences with edge replication
    gx = np.zeros_like(intens)
    gy = np.zeros_like(intens)
    if intens.shape[1] >= 2:
        gx[:, 1:-1] = intens[:, 2:] - intens[:, :-2]
        gx[:, 0] = intens[:, 1] - intens[:, 0]
        gx[:, -1] = intens[:, -1] - intens[:, -2]
    if intens.shape[0] >= 2:
        gy[1:-1, :] = intens[2:, :] - intens[:-2, :]
        gy[0, :] = intens[1, :] - intens[0, :]
        gy[-1, :] = intens[-1, :] - intens[-2, :]
    return gx, gy


def _normalized_blocks(hist: np.ndarray, params: HogParams) -> np.ndarray:
    bs = params.block_size
    stride = params.block_stride
    nb = params.blocks_per_side
    segments = []
    for by in range(nb):
        y = by * stride
        for bx in range(nb):
            x = bx * stride
            v = hist[y:y + bs, x:x + bs, :].ravel()
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                # constant region: keep the zero vector instead of 0/0
                segments.append(v)
                continue
            v = v / norm
            np.minimum(v, params.clip, out=v)
            v /= np.linalg.norm(v)
            segments.append(v)
    return np.concatenate(segments)


def extract_hog(img, params: HogParams = HogParams()) -> np.ndarray:
    """Orientation-histogram descriptor of a grayscale image.

    Resizes to the canonical side, takes centered-difference gradients with
    edge replication, votes gradient magnitudes into per-cell unsigned
    orientation histograms (linear interpolation between adjacent bins, with
    vote nodes at ``i * 180/nbins`` degrees so a pure horizontal gradient
    lands entirely in bin 0), then groups cells into overlapping blocks
    normalized with L2-Hys (normalize, clip, renormalize).  Blocks are
    concatenated row-major.
    """
    canon = resize_to_canonical(img, params.canonical_size)
    gx, gy = _centered_gradients(canon.astype(np.float64))
    hist = _kernels.cell_histograms(gx, gy, params.cell_size, params.orientation_bins)
    return _normalized_blocks(hist, params)


def _shift_brightness(img: np.ndarray, delta: int) -> np.ndarray:
    return np.clip(img.astype(np.int16) + int(delta), 0, 255).astype(np.uint8)


def _scale_contrast(img: np.ndarray, factor: float) -> np.ndarray:
    scaled = 128.0 + factor * (img.astype(np.float64) - 128.0)
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def augment(img, policy: AugmentationPolicy = AugmentationPolicy()) -> list[np.ndarray]:
    """Deterministic augmentation set; the unmodified image always comes first.

    The default policy yields 10 variants: {original, y-mirror} crossed with
    {identity, +25, -25 brightness, 1.25x, 0.8x contrast about mid-level 128}.
    All outputs keep the input's dimensions and stay inside [0, 255].
    """
    arr = as_gray_image(img)
    variants: list[np.ndarray] = []
    flips = (False, True) if policy.flip else (False,)
    for flipped in flips:
        base = np.fliplr(arr).copy() if flipped else arr.copy()
        variants.append(base)
        for delta in policy.brightness_deltas:
            variants.append(_shift_brightness(base, delta))
        for factor in policy.contrast_factors:
            variants.append(_scale_contrast(base, factor))
    return variants
