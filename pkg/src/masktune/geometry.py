"""Box-based mask rasterization.

A box-profile mask is the union of scaled superellipses, one per text
bounding box of the selected chunk level.  The family is controlled by
three knobs:

* ``s_chunk``  -- which granularity of boxes to use (character / word /
  paragraph),
* ``s_scale``  -- enlargement of each box, in [1.0, 1.5],
* ``s_round``  -- roundness in [0.0, 1.0]: 0 is the axis-aligned
  rectangle, 1 the inscribed ellipse, values in between superellipses
  of order ``2 / s_round``.

Masks everywhere in this package are 2-D ``uint8`` arrays of shape
``(height, width)`` with values in {0, 1}; 1 marks a pixel to be
removed.  Membership is evaluated at pixel centers ``(px + 0.5,
py + 0.5)`` so a centered box rasterizes flip-symmetrically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

# Chunk levels for text boxes.
CHARACTER, WORD, PARAGRAPH = 0, 1, 2
CHUNK_LEVELS = (CHARACTER, WORD, PARAGRAPH)


@dataclass(frozen=True)
class BaseBox:
    """One detected text box: center, full side lengths, chunk level."""

    center_x: float
    center_y: float
    width_a: float
    height_b: float
    chunk_level: int

    def __post_init__(self):
        if self.width_a <= 0 or self.height_b <= 0:
            raise ValueError(
                f"box sides must be positive, got {self.width_a} x {self.height_b}"
            )
        if self.chunk_level not in CHUNK_LEVELS:
            raise ValueError(f"chunk_level must be one of {CHUNK_LEVELS}, got {self.chunk_level}")


@dataclass(frozen=True)
class Type1Params:
    """Tunable parameters of the box-profile mask family."""

    s_chunk: int
    s_scale: float
    s_round: float

    def __post_init__(self):
        if self.s_chunk not in CHUNK_LEVELS:
            raise ValueError(f"s_chunk must be one of {CHUNK_LEVELS}, got {self.s_chunk}")
        if not 1.0 <= self.s_scale <= 1.5:
            raise ValueError(f"s_scale must lie in [1.0, 1.5], got {self.s_scale}")
        if not 0.0 <= self.s_round <= 1.0:
            raise ValueError(f"s_round must lie in [0.0, 1.0], got {self.s_round}")


def rasterize_type1(boxes, params: Type1Params, width: int, height: int) -> np.ndarray:
    """Rasterize the union of scaled superellipses over the selected boxes.

    Boxes whose chunk level differs from ``params.s_chunk`` are skipped.
    Shapes extending past the canvas are clipped.  An empty selection
    yields an all-zero mask.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"canvas dimensions must be positive, got {width} x {height}")
    mask = np.zeros((height, width), dtype=np.uint8)
    for box in boxes:
        if box.chunk_level != params.s_chunk:
            continue
        _paint_superellipse(mask, box, params.s_scale, params.s_round)
    return mask


def _paint_superellipse(mask: np.ndarray, box: BaseBox, scale: float, roundness: float) -> None:
    height, width = mask.shape
    half_w = scale * box.width_a / 2.0
    half_h = scale * box.height_b / 2.0

    # Candidate window (1 px slack); the predicate decides each pixel.
    x_lo = max(0, int(np.floor(box.center_x - half_w - 0.5)) - 1)
    x_hi = min(width - 1, int(np.ceil(box.center_x + half_w - 0.5)) + 1)
    y_lo = max(0, int(np.floor(box.center_y - half_h - 0.5)) - 1)
    y_hi = min(height - 1, int(np.ceil(box.center_y + half_h - 0.5)) + 1)
    if x_lo > x_hi or y_lo > y_hi:
        return

    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64) + 0.5
    ys = np.arange(y_lo, y_hi + 1, dtype=np.float64) + 0.5
    u = np.abs(xs - box.center_x)[None, :] / half_w
    v = np.abs(ys - box.center_y)[:, None] / half_h

    # max(u, v) <= 1 is the scaled-rectangle test and simultaneously the
    # overflow guard: the exponent 2/s_round blows up as s_round -> 0, but
    # powers are only ever taken of values <= 1.
    u, v = np.broadcast_arrays(u, v)
    inside = np.maximum(u, v) <= 1.0
    if roundness > 0.0:
        order = 2.0 / roundness
        uq = np.zeros_like(u)
        vq = np.zeros_like(v)
        np.power(u, order, out=uq, where=inside)
        np.power(v, order, out=vq, where=inside)
        inside &= uq + vq <= 1.0

    mask[y_lo : y_hi + 1, x_lo : x_hi + 1] |= inside.astype(np.uint8)


def mask_area(mask: np.ndarray) -> int:
    """Number of set bits in a mask."""
    return int(np.count_nonzero(mask))


def apply_mask(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Black out masked pixels of an RGB image; unmasked pixels are copied."""
    if image.shape[:2] != mask.shape:
        raise ValueError(
            f"image {image.shape[:2]} and mask {mask.shape} dimensions differ"
        )
    out = image.copy()
    out[mask.astype(bool)] = 0
    return out


def save_mask(path, mask: np.ndarray) -> None:
    """Write a mask as an 8-bit grayscale image, bit 1 <=> 255."""
    Image.fromarray((mask.astype(np.uint8) * 255)).save(path)


def load_mask(path) -> np.ndarray:
    """Read an 8-bit mask image back to a {0, 1} array (255 <=> 1)."""
    arr = np.asarray(Image.open(path).convert("L"))
    return (arr > 127).astype(np.uint8)


def load_boxes(path) -> list[BaseBox]:
    """Read a box annotation file (characters / words / paragraphs arrays)."""
    doc = json.loads(Path(path).read_text())
    boxes = []
    for key, level in (("characters", CHARACTER), ("words", WORD), ("paragraphs", PARAGRAPH)):
        for entry in doc.get(key, []):
            boxes.append(
                BaseBox(
                    center_x=float(entry["cx"]),
                    center_y=float(entry["cy"]),
                    width_a=float(entry["w"]),
                    height_b=float(entry["h"]),
                    chunk_level=level,
                )
            )
    return boxes


def save_boxes(path, image_id: str, boxes) -> None:
    """Write a box annotation file grouped by chunk level."""
    groups = {CHARACTER: [], WORD: [], PARAGRAPH: []}
    for box in boxes:
        groups[box.chunk_level].append(
            {"cx": box.center_x, "cy": box.center_y, "w": box.width_a, "h": box.height_b}
        )
    doc = {
        "image": image_id,
        "characters": groups[CHARACTER],
        "words": groups[WORD],
        "paragraphs": groups[PARAGRAPH],
    }
    Path(path).write_text(json.dumps(doc, indent=1))
