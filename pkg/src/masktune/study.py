"""Sequential optimization studies over mask-parameter spaces.

A study is an append-only list of evaluated trials plus a seed.  Each
round fits the surrogate on everything evaluated so far, proposes the
point with the highest expected improvement, evaluates it, and appends
the result.

Suggestions are a deterministic function of (seed, trials): the
candidate RNG is re-derived from the seed and the current trial count
every round, so a study resumed from its persisted record continues
exactly as an uninterrupted run would.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .gp import expected_improvement, fit_gp
from .space import ParamSpace

GRID, SUGGESTED = "grid", "suggested"

# Candidate search budget for the acquisition maximizer.
N_CANDIDATES = 1024
N_REFINE = 8


@dataclass(frozen=True)
class Trial:
    """One evaluated parameter point."""

    params: dict
    score: float
    source: str
    iteration_index: int

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"trial score must be finite, got {self.score}")
        if self.source not in (GRID, SUGGESTED):
            raise ValueError(f"source must be {GRID!r} or {SUGGESTED!r}, got {self.source}")


@dataclass
class Study:
    space: ParamSpace
    trials: list
    rng_seed: int

    def best_trial(self) -> Trial:
        return min(self.trials, key=lambda t: t.score)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate([t.score for t in self.trials])


class TrialStore:
    """Append-only JSONL record of a study, resumable by replay.

    One trial per line: ``{iteration, source, params, score, timestamp}``.
    The timestamp is a logical sequence number, not wall-clock time, so
    reruns of a seeded study produce byte-identical files.  A sidecar
    ``*.pending`` marker brackets each evaluator call: it is written
    before the call and removed after the trial line is flushed, so a
    crash can only ever lose the in-flight evaluation.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.pending_path = self.path.with_suffix(self.path.suffix + ".pending")

    def exists(self) -> bool:
        return self.path.exists()

    def load(self) -> list[Trial]:
        trials = []
        if not self.path.exists():
            return trials
        for line in self.path.read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            trials.append(
                Trial(
                    params=rec["params"],
                    score=rec["score"],
                    source=rec["source"],
                    iteration_index=rec["iteration"],
                )
            )
        return trials

    def append(self, trial: Trial) -> None:
        rec = {
            "iteration": trial.iteration_index,
            "source": trial.source,
            "params": trial.params,
            "score": trial.score,
            "timestamp": trial.iteration_index,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec) + "\n")
            fh.flush()

    def mark_pending(self, iteration: int, params: dict) -> None:
        self.pending_path.parent.mkdir(parents=True, exist_ok=True)
        self.pending_path.write_text(json.dumps({"iteration": iteration, "params": params}))

    def clear_pending(self) -> None:
        self.pending_path.unlink(missing_ok=True)


def _point_key(space: ParamSpace, point: dict) -> tuple:
    return tuple(point[name] for name in space.names)


def _candidate_vectors(space: ParamSpace, rng: np.random.Generator) -> np.ndarray:
    """Quasi-random candidates in encoded space, stratified by category combo."""
    cat_dims = [d for d in space.dimensions if d.kind == "categorical"]
    scalar_dims = [d for d in space.dimensions if d.kind != "categorical"]

    combos = list(itertools.product(*[range(len(d.choices)) for d in cat_dims]))
    if len(combos) > 64:
        picks = rng.choice(len(combos), size=64, replace=False)
        combos = [combos[i] for i in picks]
    # Power of two keeps each Sobol block balanced.
    per_combo = 1 << max(0, int(np.ceil(np.log2(N_CANDIDATES / len(combos)))))

    if scalar_dims:
        sobol = qmc.Sobol(d=len(scalar_dims), scramble=True, seed=rng)
        scalar_samples = np.concatenate([sobol.random(per_combo) for _ in combos])
    else:
        scalar_samples = np.zeros((len(combos), 0))
        per_combo = 1

    vectors = []
    for ci, combo in enumerate(combos):
        for si in range(per_combo):
            vec = np.zeros(space.encoded_width)
            offset = 0
            cat_i = scal_i = 0
            for dim in space.dimensions:
                if dim.kind == "categorical":
                    vec[offset + combo[cat_i]] = 1.0
                    cat_i += 1
                else:
                    vec[offset] = scalar_samples[ci * per_combo + si, scal_i]
                    scal_i += 1
                offset += dim.encoded_width
            vectors.append(vec)
    return np.array(vectors)


def _scalar_offsets(space: ParamSpace) -> list[int]:
    offsets, pos = [], 0
    for dim in space.dimensions:
        if dim.kind != "categorical":
            offsets.append(pos)
        pos += dim.encoded_width
    return offsets


def _categorical_blocks(space: ParamSpace) -> list[tuple[int, int]]:
    blocks, pos = [], 0
    for dim in space.dimensions:
        if dim.kind == "categorical":
            blocks.append((pos, dim.encoded_width))
        pos += dim.encoded_width
    return blocks


def _refine(ei_of, space: ParamSpace, vec: np.ndarray) -> tuple[np.ndarray, float]:
    """Local pattern search on scalar coordinates plus categorical vertex sweep."""
    scalar_offsets = _scalar_offsets(space)
    cur = vec.copy()
    cur_ei = float(ei_of(cur[None, :])[0])
    step = 0.1
    while step > 1e-4 and scalar_offsets:
        probes = []
        for j in scalar_offsets:
            for delta in (step, -step):
                probe = cur.copy()
                probe[j] = min(1.0, max(0.0, probe[j] + delta))
                probes.append(probe)
        values = ei_of(np.array(probes))
        best = int(np.argmax(values))
        if values[best] > cur_ei:
            cur, cur_ei = probes[best], float(values[best])
        else:
            step /= 2.0
    for start, width in _categorical_blocks(space):
        probes = []
        for choice in range(width):
            probe = cur.copy()
            probe[start : start + width] = 0.0
            probe[start + choice] = 1.0
            probes.append(probe)
        values = ei_of(np.array(probes))
        best = int(np.argmax(values))
        if values[best] > cur_ei:
            cur, cur_ei = probes[best], float(values[best])
    return cur, cur_ei


def suggest(study: Study) -> dict:
    """Propose the in-domain point maximizing expected improvement.

    Deterministic given the study seed and trial history.  If the
    acquisition optimum decodes to an already-evaluated point, the
    highest-EI unevaluated candidate is returned instead.
    """
    if len(study.trials) < 2:
        raise ValueError(f"need at least 2 trials to suggest, got {len(study.trials)}")
    space = study.space
    X = np.stack([space.encode(t.params) for t in study.trials])
    y = np.array([t.score for t in study.trials])
    gp = fit_gp(X, y)
    best = float(np.min(y))

    def ei_of(vectors: np.ndarray) -> np.ndarray:
        mean, var = gp.predict(vectors)
        return expected_improvement(mean, np.sqrt(var), best)

    rng = np.random.default_rng([study.rng_seed, len(study.trials)])
    candidates = _candidate_vectors(space, rng)
    cand_ei = ei_of(candidates)

    ranked = []
    for idx in np.argsort(cand_ei)[::-1][:N_REFINE]:
        ranked.append(_refine(ei_of, space, candidates[idx]))
    ranked.extend(zip(candidates, cand_ei))
    ranked.sort(key=lambda pair: pair[1], reverse=True)

    seen = {_point_key(space, t.params) for t in study.trials}
    for vec, _ in ranked:
        point = space.decode(vec)
        if _point_key(space, point) not in seen:
            return point
    # Tiny fully-discrete spaces can exhaust every candidate; fall back to
    # the first unevaluated point in lexicographic order.
    for point in space.iter_points():
        if _point_key(space, point) not in seen:
            return point
    raise RuntimeError("search space exhausted")


def run_study(space, evaluator, init, max_iters: int, seed: int, store: TrialStore | None = None) -> Study:
    """Evaluate the init points then run suggest/evaluate rounds.

    With a store attached the study resumes from whatever the store
    already holds; completed evaluations are never repeated.  An
    evaluator failure propagates after the completed history has been
    persisted.
    """
    if max_iters < 0:
        raise ValueError(f"max_iters must be >= 0, got {max_iters}")
    init = list(init)
    trials = store.load() if store is not None else []
    for i, trial in enumerate(trials[: len(init)]):
        if trial.params != init[i]:
            raise ValueError(
                f"stored trial {i} params {trial.params} do not match init point {init[i]}"
            )
    study = Study(space=space, trials=trials, rng_seed=seed)

    def evaluate(point: dict, source: str) -> None:
        space.validate(point)
        index = len(study.trials)
        if store is not None:
            store.mark_pending(index, point)
        score = float(evaluator(point))
        trial = Trial(params=point, score=score, source=source, iteration_index=index)
        study.trials.append(trial)
        if store is not None:
            store.append(trial)
            store.clear_pending()

    for point in init[len(study.trials) :]:
        evaluate(point, GRID)
    total = len(init) + max_iters
    while len(study.trials) < total:
        evaluate(suggest(study), SUGGESTED)
    return study
