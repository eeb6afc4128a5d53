"""Deterministic synthetic text-removal benchmarks.

Each generated image is a pale gradient background with a few soft
color patches, overprinted with dark glyph blobs laid out in
paragraphs, lines and words.  Alongside every image the generator
writes the clean background (removal target), per-level box
annotations, a noisy "processed" copy for color-threshold masking, and
the exact stroke bitmap for oracle scoring.

Glyphs are drawn through the same profile rasterizer the optimizer
tunes, at a profile chosen off the initial grid, so a study has a known
in-domain optimum to find.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import (
    CHARACTER,
    PARAGRAPH,
    WORD,
    BaseBox,
    Type1Params,
    rasterize_type1,
    save_boxes,
    save_mask,
)

SIZE = 512

# Stroke profile relative to the character boxes.  Off the initial grid
# on purpose: grid points can cover the strokes but never fit them.
GLYPH_SCALE = 1.18
GLYPH_ROUND = 0.6
EDGE_CORE_SCALE = 1.06
EDGE_ALPHA = 0.25

PROCESSED_NOISE = 3


def _background(rng: np.random.Generator) -> np.ndarray:
    ys = np.linspace(0.0, 1.0, SIZE)[:, None, None]
    xs = np.linspace(0.0, 1.0, SIZE)[None, :, None]
    base = rng.uniform(195, 235, size=3)
    tilt = rng.uniform(-18, 18, size=3)
    sweep = rng.uniform(-12, 12, size=3)
    canvas = base + tilt * ys + sweep * xs
    for _ in range(rng.integers(2, 4)):
        x0, y0 = rng.integers(0, SIZE - 96, size=2)
        w, h = rng.integers(72, 192, size=2)
        shade = rng.uniform(-14, 14, size=3)
        canvas[y0 : y0 + h, x0 : x0 + w] += shade
    return np.clip(canvas, 170, 250).astype(np.uint8)


def _layout(rng: np.random.Generator) -> list[BaseBox]:
    """Place character boxes line by line; words and paragraphs follow."""
    boxes: list[BaseBox] = []
    margin = 36.0
    y = margin + float(rng.uniform(0, 20))
    for _ in range(2):
        para_chars: list[list[BaseBox]] = []
        for _line in range(int(rng.integers(2, 4))):
            height = float(rng.uniform(20, 26))
            if y + height / 2 > SIZE - margin:
                break
            x = margin + float(rng.uniform(0, 16))
            line_words = 0
            while line_words < 3:
                word: list[BaseBox] = []
                for _ in range(int(rng.integers(3, 6))):
                    width = float(rng.uniform(0.62, 0.88)) * height
                    if x + width > SIZE - margin:
                        break
                    word.append(BaseBox(x + width / 2, y, width, height, CHARACTER))
                    x += width * 1.38
                if len(word) < 2:
                    break
                para_chars.append(word)
                line_words += 1
                x += height * 0.9
            y += height * 1.7
        if para_chars:
            for word in para_chars:
                boxes.extend(word)
                boxes.append(_enclosing(word, WORD))
            boxes.append(_enclosing([b for w in para_chars for b in w], PARAGRAPH))
        y += 30.0
    return boxes


def _enclosing(chars: list[BaseBox], level: int) -> BaseBox:
    x_lo = min(b.center_x - b.width_a / 2 for b in chars)
    x_hi = max(b.center_x + b.width_a / 2 for b in chars)
    y_lo = min(b.center_y - b.height_b / 2 for b in chars)
    y_hi = max(b.center_y + b.height_b / 2 for b in chars)
    return BaseBox((x_lo + x_hi) / 2, (y_lo + y_hi) / 2, x_hi - x_lo, y_hi - y_lo, level)


def _render_item(rng: np.random.Generator):
    background = _background(rng)
    boxes = _layout(rng)
    stroke = rasterize_type1(boxes, Type1Params(CHARACTER, GLYPH_SCALE, GLYPH_ROUND), SIZE, SIZE)
    core = rasterize_type1(boxes, Type1Params(CHARACTER, EDGE_CORE_SCALE, GLYPH_ROUND), SIZE, SIZE)
    alpha = stroke.astype(np.float64) * EDGE_ALPHA
    alpha[core > 0] = 1.0

    ink = rng.uniform(25, 70, size=3) + rng.normal(0.0, 6.0, size=(SIZE, SIZE, 3))
    ink = np.clip(ink, 0, 110)
    original = background * (1.0 - alpha[..., None]) + ink * alpha[..., None]
    original = np.clip(np.round(original), 0, 255).astype(np.uint8)

    # "Processed" plays the role of a draft removal output: strokes gone,
    # background slightly off, so color distance to the original peaks on
    # the strokes and stays within the noise band elsewhere.
    noise = rng.integers(-PROCESSED_NOISE, PROCESSED_NOISE + 1, size=original.shape)
    processed = np.clip(background.astype(np.int16) + noise, 0, 255).astype(np.uint8)
    return background, original, processed, stroke, boxes


def generate_benchmark(out_dir, n_images: int = 8, seed: int = 0) -> Path:
    """Write a benchmark under ``out_dir`` and return the manifest path.

    Output is a pure function of (n_images, seed); every image gets its
    own stream derived from the seed, so the first k images match
    across runs with different n_images.
    """
    if n_images < 1:
        raise ValueError(f"n_images must be >= 1, got {n_images}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx in range(n_images):
        rng = np.random.default_rng([seed, idx])
        background, original, processed, stroke, boxes = _render_item(rng)
        item_id = f"img_{idx:03d}"
        names = {
            "id": item_id,
            "original": f"{item_id}.png",
            "ground_truth": f"{item_id}_clean.png",
            "boxes": f"{item_id}_boxes.json",
            "processed": f"{item_id}_processed.png",
            "stroke_truth": f"{item_id}_stroke.png",
        }
        Image.fromarray(original).save(out_dir / names["original"])
        Image.fromarray(background).save(out_dir / names["ground_truth"])
        Image.fromarray(processed).save(out_dir / names["processed"])
        save_mask(out_dir / names["stroke_truth"], stroke)
        save_boxes(out_dir / names["boxes"], names["original"], boxes)
        entries.append(names)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps({"items": entries}, indent=2) + "\n")
    return manifest_path
