"""Command-line front-end.

Thin wrapper over the library: every subcommand is reachable through
library calls with identical results.  Exit codes: 0 success, 1 usage
error, 2 runtime error.

Subcommands:

* ``make-benchmark`` writes a synthetic benchmark directory.
* ``gen-mask`` renders masks for one parameter point.
* ``grid-init`` prints the initial parameter grid, one JSON point per line.
* ``optimize`` runs a full study and exports the best-so-far curve.
* ``report`` tabulates score against one dimension from a stored study.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from .geometry import apply_mask, save_mask
from .harness import (
    OracleEvaluator,
    OracleWeights,
    dependency_report,
    load_benchmark,
    render_item_mask,
    score_point,
)
from .protocol import SocketEvaluator, SubprocessEvaluator
from .space import MODEL_TYPES, grid_init, space_for
from .study import Study, TrialStore, run_study
from .synthetic import generate_benchmark

OK, USAGE_ERROR, RUNTIME_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    """Everything one optimization run needs.

    ``evaluator`` takes exactly one of three forms: ``oracle`` (built-in
    synthetic scorer), ``cmd:<command line>`` (subprocess evaluator), or
    ``tcp://host:port`` (socket evaluator).
    """

    model_type: str
    manifest: Path
    evaluator: str
    seed: int
    out_dir: Path
    max_iters: int = 100
    study_id: str = "study"
    weights: OracleWeights = field(default_factory=OracleWeights)

    def __post_init__(self):
        if self.model_type not in MODEL_TYPES:
            raise ValueError(f"model_type must be one of {MODEL_TYPES}, got {self.model_type!r}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.evaluator != "oracle" and not self.evaluator.startswith(("cmd:", "tcp://")):
            raise ValueError(
                f"evaluator must be 'oracle', 'cmd:<command>' or 'tcp://host:port', got {self.evaluator!r}"
            )


def _make_evaluator(config: RunConfig, items):
    if config.evaluator == "oracle":
        return OracleEvaluator(items, config.weights)
    if config.evaluator.startswith("cmd:"):
        return SubprocessEvaluator(config.evaluator[len("cmd:") :])
    return SocketEvaluator(config.evaluator)


def cmd_optimize(config: RunConfig) -> int:
    """Run grid init plus suggestion rounds; persist the study.

    Writes ``trials.jsonl`` (the resumable study record) and
    ``best_so_far.csv`` under the output directory.  Rerunning in place
    resumes from the stored trials.
    """
    items = load_benchmark(config.manifest)
    space = space_for(config.model_type)
    init = grid_init(config.model_type)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    store = TrialStore(config.out_dir / "trials.jsonl")
    evaluator = _make_evaluator(config, items)
    try:
        study = run_study(
            space,
            lambda point: score_point(
                items,
                point,
                config.model_type,
                evaluator,
                workdir=config.out_dir,
                study_id=config.study_id,
            ),
            init,
            config.max_iters,
            config.seed,
            store,
        )
    finally:
        evaluator.close()

    curve_path = config.out_dir / "best_so_far.csv"
    with curve_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_score"])
        for trial, best in zip(study.trials, study.best_so_far()):
            writer.writerow([trial.iteration_index, repr(float(best))])
    best = study.best_trial()
    print(f"best score {best.score} at {json.dumps(best.params)}")
    print(f"study record: {store.path}")
    print(f"best-so-far curve: {curve_path}")
    return OK


def cmd_report(study_path, fixed: dict, sweep: str, model_type: str, out_path) -> int:
    """Export (sweep value, score) rows for trials matching ``fixed``."""
    store = TrialStore(study_path)
    if not store.exists():
        raise FileNotFoundError(f"study record not found: {study_path}")
    study = Study(space=space_for(model_type), trials=store.load(), rng_seed=0)
    rows = dependency_report(study, fixed, sweep)
    out_path = Path(out_path)
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([sweep, "score"])
        for value, score in rows:
            writer.writerow([value, repr(float(score))])
    print(f"wrote {len(rows)} rows to {out_path}")
    return OK


def _cmd_gen_mask(args) -> int:
    items = load_benchmark(args.manifest)
    if args.id is not None:
        items = [item for item in items if item.id == args.id]
        if not items:
            raise ValueError(f"no item with id {args.id!r} in {args.manifest}")
    space_for(args.model).validate(args.params)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for item in items:
        mask = render_item_mask(item, args.model, args.params)
        save_mask(out_dir / f"{item.id}_mask.png", mask)
        if args.apply:
            Image.fromarray(apply_mask(item.original, mask)).save(
                out_dir / f"{item.id}_masked.png"
            )
    print(f"wrote masks for {len(items)} item(s) to {out_dir}")
    return OK


def _cmd_grid_init(args) -> int:
    lines = [json.dumps(point) for point in grid_init(args.model)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def _cmd_make_benchmark(args) -> int:
    manifest = generate_benchmark(args.out, n_images=args.images, seed=args.seed)
    print(f"wrote benchmark manifest: {manifest}")
    return OK


def _cmd_optimize(args) -> int:
    config = RunConfig(
        model_type=args.model,
        manifest=Path(args.manifest),
        evaluator=args.evaluator,
        seed=args.seed,
        out_dir=Path(args.out),
        max_iters=args.iters,
        study_id=args.study_id,
        weights=OracleWeights(w_miss=args.w_miss, w_over=args.w_over, w_frag=args.w_frag),
    )
    return cmd_optimize(config)


def _parse_fix(space, specs) -> dict:
    """Parse repeated ``--fix name=value`` / ``name=lo:hi`` flags."""
    fixed = {}
    for spec in specs or []:
        name, eq, raw = spec.partition("=")
        if not eq:
            raise ValueError(f"--fix needs name=value or name=lo:hi, got {spec!r}")
        if name not in space.names:
            raise ValueError(f"unknown dimension {name!r}; valid: {sorted(space.names)}")
        if ":" in raw:
            lo, _, hi = raw.partition(":")
            fixed[name] = (_parse_scalar(lo), _parse_scalar(hi))
        else:
            fixed[name] = _parse_scalar(raw)
    return fixed


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _cmd_report(args) -> int:
    space = space_for(args.model)
    fixed = _parse_fix(space, args.fix)
    return cmd_report(args.store, fixed, args.sweep, args.model, args.out)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this project reserves 2 for
    runtime failures, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _json_point(text: str) -> dict:
    point = json.loads(text)
    if not isinstance(point, dict):
        raise argparse.ArgumentTypeError("params must be a JSON object")
    return point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="masktune",
        description="Tune text-removal mask parameters against a pluggable evaluator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-benchmark", help="generate a synthetic benchmark directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--images", type=int, default=8, help="number of images (default 8)")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.set_defaults(func=_cmd_make_benchmark)

    p = sub.add_parser("gen-mask", help="render masks for one parameter point")
    p.add_argument("--manifest", required=True, help="benchmark manifest path")
    p.add_argument("--model", required=True, choices=MODEL_TYPES)
    p.add_argument(
        "--params",
        required=True,
        type=_json_point,
        help='parameter point as JSON, e.g. \'{"s_chunk": 0, "s_scale": 1.25, "s_round": 0.5}\'',
    )
    p.add_argument("--out", required=True, help="output directory for <id>_mask.png files")
    p.add_argument("--id", help="only this item id (default: all items)")
    p.add_argument("--apply", action="store_true", help="also write masked originals")
    p.set_defaults(func=_cmd_gen_mask)

    p = sub.add_parser("grid-init", help="print the initial grid, one JSON point per line")
    p.add_argument("--model", required=True, choices=MODEL_TYPES)
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(func=_cmd_grid_init)

    p = sub.add_parser(
        "optimize",
        help="run a study: grid init then suggestion rounds",
        epilog=(
            "Outputs under --out: trials.jsonl (one JSON trial per line: iteration, "
            "source, params, score, timestamp) and best_so_far.csv with columns "
            "iteration,best_score (cumulative minimum). Rerunning with the same --out "
            "resumes the stored study."
        ),
    )
    p.add_argument("--manifest", required=True, help="benchmark manifest path")
    p.add_argument("--model", required=True, choices=MODEL_TYPES)
    p.add_argument(
        "--evaluator",
        default="oracle",
        help="'oracle', 'cmd:<command line>' or 'tcp://host:port' (default oracle)",
    )
    p.add_argument("--seed", type=int, default=0, help="study seed (default 0)")
    p.add_argument("--iters", type=int, default=100, help="suggestion rounds after the grid (default 100)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--study-id", default="study", help="study id sent to the evaluator")
    p.add_argument("--w-miss", type=float, default=1.0, help="oracle weight: missed stroke fraction")
    p.add_argument("--w-over", type=float, default=0.5, help="oracle weight: over-masked fraction")
    p.add_argument("--w-frag", type=float, default=0.05, help="oracle weight: mask fragmentation")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser(
        "report",
        help="tabulate score against one dimension from a stored study",
        epilog=(
            "Output CSV columns: <sweep dimension>,score; rows are trials matching "
            "every --fix constraint, sorted by sweep value then evaluation order."
        ),
    )
    p.add_argument("--store", required=True, help="trials.jsonl from an optimize run")
    p.add_argument("--model", required=True, choices=MODEL_TYPES)
    p.add_argument("--sweep", required=True, help="dimension for the first CSV column")
    p.add_argument(
        "--fix",
        action="append",
        metavar="NAME=VALUE|NAME=LO:HI",
        help="constraint on another dimension; repeatable",
    )
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps failures to exit 2
        print(f"masktune: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
