"""Benchmark loading and study-side scoring.

A benchmark is a JSON manifest listing items; every raster is resized
to the fixed working resolution at load time and cached on the item.
``score_point`` renders one mask per item for a parameter point, writes
the rasters to a work directory, and hands (original, mask) pairs to an
evaluator for scoring.

The built-in synthetic oracle scores masks against known stroke truth
so studies can run without any external evaluator process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .geometry import BaseBox, Type1Params, load_boxes, rasterize_type1, save_mask
from .protocol import EvaluatorError
from .space import TYPE1, TYPE2, space_for
from .stroke import ImagePair, Type2Params, type2_mask

WORKING_SIZE = 512

_REQUIRED_FIELDS = ("id", "original", "ground_truth", "boxes")
_OPTIONAL_FIELDS = ("processed", "stroke_truth")


class BenchmarkError(ValueError):
    """Manifest or item problem; message names every offending entry."""


@dataclass
class BenchmarkItem:
    """One benchmark image with its annotations, rasters at working size."""

    id: str
    original: np.ndarray
    ground_truth: np.ndarray
    boxes: list
    original_path: Path
    processed: np.ndarray | None = None
    stroke_truth: np.ndarray | None = None


@dataclass
class OracleWeights:
    """Mixing weights for the synthetic score terms."""

    w_miss: float = 1.0
    w_over: float = 0.5
    w_frag: float = 0.05
    frag_norm: int = 100


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        if rgb.size != (WORKING_SIZE, WORKING_SIZE):
            rgb = rgb.resize((WORKING_SIZE, WORKING_SIZE), Image.BILINEAR)
        return np.asarray(rgb, dtype=np.uint8)


def _load_bitmap(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        gray = img.convert("L")
        if gray.size != (WORKING_SIZE, WORKING_SIZE):
            gray = gray.resize((WORKING_SIZE, WORKING_SIZE), Image.NEAREST)
        return (np.asarray(gray) > 127).astype(np.uint8)


def _scale_boxes(boxes: list, src_size: tuple[int, int]) -> list:
    sx = WORKING_SIZE / src_size[0]
    sy = WORKING_SIZE / src_size[1]
    if sx == 1.0 and sy == 1.0:
        return boxes
    return [
        BaseBox(b.center_x * sx, b.center_y * sy, b.width_a * sx, b.height_b * sy, b.chunk_level)
        for b in boxes
    ]


def load_benchmark(manifest_path) -> list[BenchmarkItem]:
    """Load and validate a benchmark manifest.

    All problems are collected and reported together, each one naming
    the item id and field involved.  An empty manifest is valid.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise BenchmarkError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BenchmarkError(f"manifest is not valid JSON: {exc}") from exc
    entries = manifest.get("items") if isinstance(manifest, dict) else manifest
    if not isinstance(entries, list):
        raise BenchmarkError('manifest must be a list of items or {"items": [...]}')

    root = manifest_path.parent
    problems: list[str] = []
    items: list[BenchmarkItem] = []
    for pos, entry in enumerate(entries):
        if not isinstance(entry, dict):
            problems.append(f"item #{pos}: not an object")
            continue
        item_id = str(entry.get("id", f"#{pos}"))
        missing = [f for f in _REQUIRED_FIELDS if f not in entry]
        if missing:
            problems.extend(f"item {item_id}: missing field {f!r}" for f in missing)
            continue
        paths = {}
        broken = False
        for fieldname in _REQUIRED_FIELDS[1:] + _OPTIONAL_FIELDS:
            if fieldname not in entry:
                continue
            path = root / entry[fieldname]
            if not path.exists():
                problems.append(f"item {item_id}: {fieldname} file not found: {path}")
                broken = True
            paths[fieldname] = path
        if broken:
            continue
        try:
            with Image.open(paths["original"]) as img:
                src_size = img.size
            item = BenchmarkItem(
                id=item_id,
                original=_load_rgb(paths["original"]),
                ground_truth=_load_rgb(paths["ground_truth"]),
                boxes=_scale_boxes(load_boxes(paths["boxes"]), src_size),
                original_path=paths["original"],
                processed=_load_rgb(paths["processed"]) if "processed" in paths else None,
                stroke_truth=_load_bitmap(paths["stroke_truth"]) if "stroke_truth" in paths else None,
            )
        except (OSError, ValueError, KeyError) as exc:
            problems.append(f"item {item_id}: malformed entry: {exc}")
            continue
        items.append(item)
    if problems:
        raise BenchmarkError("invalid benchmark:\n" + "\n".join(problems))
    return items


def render_item_mask(item: BenchmarkItem, model_type: str, point: dict) -> np.ndarray:
    """Render the mask a parameter point produces for one item."""
    if model_type == TYPE1:
        params = Type1Params(**point)
        return rasterize_type1(item.boxes, params, WORKING_SIZE, WORKING_SIZE)
    if model_type == TYPE2:
        if item.processed is None:
            raise BenchmarkError(f"item {item.id}: stroke-model scoring needs a processed image")
        params = Type2Params(**point)
        return type2_mask(ImagePair(item.original, item.processed), params)
    raise ValueError(f"unknown model type {model_type!r}")


def score_point(items, point, model_type, evaluator, *, workdir, study_id="study") -> float:
    """Render masks for every item and get one score from the evaluator.

    Masks and working-size originals are written under ``workdir`` so
    out-of-process evaluators can read them by path.  One evaluator call
    covers the whole benchmark.
    """
    items = list(items)
    if not items:
        raise ValueError("cannot score an empty benchmark")
    space_for(model_type).validate(point)
    workdir = Path(workdir)
    image_dir = workdir / "images"
    mask_dir = workdir / "masks"
    image_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)

    pairs = []
    for item in items:
        original_path = image_dir / f"{item.id}.png"
        if not original_path.exists():
            Image.fromarray(item.original).save(original_path)
        mask = render_item_mask(item, model_type, point)
        mask_path = mask_dir / f"{item.id}.png"
        save_mask(mask_path, mask)
        pairs.append((item.id, original_path, mask_path))
    try:
        return evaluator.score(study_id, point, pairs)
    except EvaluatorError as exc:
        raise EvaluatorError(f"point {point}: {exc}", code=exc.code) from exc


def _component_count(bits: np.ndarray) -> int:
    _, count = ndimage.label(bits, structure=np.ones((3, 3), dtype=np.uint8))
    return count


def synthetic_oracle(items, masks, weights: OracleWeights | None = None) -> float:
    """Score masks against stroke truth; lower is better.

    Per item: the miss term is the fraction of stroke pixels left
    unmasked, the over term is the image fraction occupied by masked
    non-stroke pixels, and the fragmentation term counts connected
    components in excess of the stroke truth's own (capped and scaled
    to [0, 1]).  Terms are combined with the configured weights and
    averaged over items.
    """
    weights = weights or OracleWeights()
    items = list(items)
    masks = list(masks)
    if len(items) != len(masks):
        raise ValueError(f"{len(items)} items but {len(masks)} masks")
    if not items:
        raise ValueError("cannot score an empty benchmark")
    total = 0.0
    for item, mask in zip(items, masks):
        if item.stroke_truth is None:
            raise BenchmarkError(f"item {item.id}: oracle scoring needs stroke_truth")
        stroke = item.stroke_truth.astype(bool)
        covered = mask.astype(bool)
        n_stroke = int(stroke.sum())
        miss = float((stroke & ~covered).sum()) / n_stroke if n_stroke else 0.0
        over = float((covered & ~stroke).sum()) / stroke.size
        excess = max(0, _component_count(covered) - _component_count(stroke))
        frag = min(excess, weights.frag_norm) / weights.frag_norm
        total += weights.w_miss * miss + weights.w_over * over + weights.w_frag * frag
    return total / len(items)


class OracleEvaluator:
    """In-process evaluator backed by the synthetic oracle.

    Presents the same ``score(study_id, point, pairs)`` surface as the
    wire-protocol clients; masks are read back from the paths in the
    request so the scoring route matches an external evaluator's.
    """

    def __init__(self, items, weights: OracleWeights | None = None):
        self._by_id = {item.id: item for item in items}
        self._weights = weights or OracleWeights()

    def score(self, study_id: str, point: dict, pairs: list) -> float:
        items, masks = [], []
        for item_id, _original, mask_path in pairs:
            item = self._by_id.get(str(item_id))
            if item is None:
                raise BenchmarkError(f"unknown item id {item_id!r}")
            with Image.open(mask_path) as img:
                bits = (np.asarray(img.convert("L")) > 127).astype(np.uint8)
            items.append(item)
            masks.append(bits)
        return synthetic_oracle(items, masks, self._weights)

    def close(self) -> None:
        pass


def dependency_report(study, fixed: dict, sweep: str) -> list[tuple]:
    """Filter a study's trials and tabulate score against one dimension.

    ``fixed`` maps dimension names to either an exact value or a
    ``(lo, hi)`` interval; trials matching every constraint are emitted
    as (sweep value, score) rows sorted by sweep value, then by
    evaluation order.
    """
    names = set(study.space.names)
    if sweep not in names:
        raise ValueError(f"unknown sweep dimension {sweep!r}; valid: {sorted(names)}")
    for name in fixed:
        if name not in names:
            raise ValueError(f"unknown fixed dimension {name!r}; valid: {sorted(names)}")
    if sweep in fixed:
        raise ValueError(f"sweep dimension {sweep!r} cannot also be fixed")

    def matches(trial) -> bool:
        for name, want in fixed.items():
            have = trial.params[name]
            if isinstance(want, (tuple, list)):
                lo, hi = want
                if not lo <= have <= hi:
                    return False
            elif have != want:
                return False
        return True

    rows = [
        (trial.params[sweep], trial.score, trial.iteration_index)
        for trial in study.trials
        if matches(trial)
    ]
    rows.sort(key=lambda r: (r[0], r[2]))
    return [(value, score) for value, score, _ in rows]
