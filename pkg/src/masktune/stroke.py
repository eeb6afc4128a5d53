"""Stroke-based mask extraction.

A stroke-profile mask is built in two stages: pixels whose RGB color
distance between the original image and a stroke-removed rendition
exceeds ``t_thres`` are marked, then the bit map is reshaped by signed
iterated morphology -- ``t_times`` > 0 dilates, < 0 erodes, 0 leaves it
untouched -- with a filled square structuring element of side
``t_kernel``.

Both dilation and erosion treat everything outside the canvas as
unmasked (zero padding), so masks touching the border erode inward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

KERNEL_SIZES = (1, 3, 5, 7)


@dataclass(frozen=True)
class Type2Params:
    """Tunable parameters of the stroke-profile mask family."""

    t_thres: int
    t_times: int
    t_kernel: int

    def __post_init__(self):
        if not 1 <= self.t_thres <= 100:
            raise ValueError(f"t_thres must lie in 1..100, got {self.t_thres}")
        if not -5 <= self.t_times <= 5:
            raise ValueError(f"t_times must lie in -5..5, got {self.t_times}")
        if self.t_kernel not in KERNEL_SIZES:
            raise ValueError(f"t_kernel must be one of {KERNEL_SIZES}, got {self.t_kernel}")


@dataclass(frozen=True)
class ImagePair:
    """An original image and its stroke-removed rendition, same size."""

    original: np.ndarray
    processed: np.ndarray

    def __post_init__(self):
        if self.original.shape != self.processed.shape:
            raise ValueError(
                f"image pair dimensions differ: {self.original.shape} vs {self.processed.shape}"
            )


def threshold_mask(pair: ImagePair, t_thres: int) -> np.ndarray:
    """Mark pixels whose Euclidean RGB distance exceeds the threshold.

    The comparison is strict: a pixel at distance exactly ``t_thres``
    stays unmasked.  Distances are compared squared in integer
    arithmetic, so the boundary is exact.
    """
    if not 1 <= t_thres <= 100:
        raise ValueError(f"t_thres must lie in 1..100, got {t_thres}")
    diff = pair.original.astype(np.int32) - pair.processed.astype(np.int32)
    dist_sq = np.sum(diff * diff, axis=-1)
    return (dist_sq > t_thres * t_thres).astype(np.uint8)


def morphology(mask: np.ndarray, t_times: int, t_kernel: int) -> np.ndarray:
    """Apply |t_times| rounds of dilation (t_times > 0) or erosion (< 0).

    ``t_times == 0`` or ``t_kernel == 1`` returns the input unchanged.
    """
    if t_kernel not in KERNEL_SIZES:
        raise ValueError(f"t_kernel must be one of {KERNEL_SIZES}, got {t_kernel}")
    if not -5 <= t_times <= 5:
        raise ValueError(f"t_times must lie in -5..5, got {t_times}")
    if t_times == 0 or t_kernel == 1:
        return mask.copy()
    structure = np.ones((t_kernel, t_kernel), dtype=bool)
    bits = mask.astype(bool)
    if t_times > 0:
        out = ndimage.binary_dilation(bits, structure=structure, iterations=t_times)
    else:
        out = ndimage.binary_erosion(
            bits, structure=structure, iterations=-t_times, border_value=0
        )
    return out.astype(np.uint8)


def type2_mask(pair: ImagePair, params: Type2Params) -> np.ndarray:
    """Thresholding followed by signed iterated morphology."""
    return morphology(threshold_mask(pair, params.t_thres), params.t_times, params.t_kernel)
