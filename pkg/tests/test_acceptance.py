"""Acceptance gate.

One test per required behavior.  Each test asserts both the stated
tolerance and its wall-clock budget, so a `pytest -v` run of this file
gives one pass/fail line per criterion.
"""

import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

from masktune import (
    CHARACTER,
    BaseBox,
    Trial,
    TrialStore,
    Type1Params,
    expected_improvement,
    fit_gp,
    generate_benchmark,
    grid_init,
    load_benchmark,
    morphology,
    rasterize_type1,
    render_item_mask,
    run_study,
    space_for,
    synthetic_oracle,
)
from masktune.cli import OK, main

from oracles import gp_predict_oracle, morphology_set_oracle, morphology_shift_oracle, type1_pixel_oracle


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f}s, budget {seconds:.0f}s"


def random_case(rng):
    width = int(rng.integers(8, 65))
    height = int(rng.integers(8, 65))
    boxes = []
    for _ in range(int(rng.integers(1, 5))):
        boxes.append(
            BaseBox(
                center_x=float(rng.uniform(-4, width + 4)),
                center_y=float(rng.uniform(-4, height + 4)),
                width_a=float(rng.uniform(2, 40)),
                height_b=float(rng.uniform(2, 40)),
                chunk_level=int(rng.integers(0, 3)),
            )
        )
    return boxes, width, height


def test_rasterization_matches_pixel_oracle():
    """200 random cases on canvases up to 64x64, bit-exact, < 10 s."""
    rng = np.random.default_rng(2024)
    with budget(10):
        for case in range(200):
            boxes, width, height = random_case(rng)
            if case % 10 == 0:
                s_round = 0.0
            elif case % 10 == 5:
                s_round = 1.0
            else:
                s_round = float(rng.uniform(0, 1))
            params = Type1Params(
                s_chunk=int(rng.integers(0, 3)),
                s_scale=float(rng.uniform(1.0, 1.5)),
                s_round=s_round,
            )
            fast = rasterize_type1(boxes, params, width, height)
            slow = type1_pixel_oracle(boxes, params, width, height)
            assert np.array_equal(fast, slow), f"case {case} diverged"


def test_reference_areas():
    """100x200 box: rectangle covers 20000 pixels, ellipse 15708 +/- 1%; < 1 s."""
    with budget(1):
        box = [BaseBox(128.0, 160.0, 100.0, 200.0, CHARACTER)]
        rect = rasterize_type1(box, Type1Params(CHARACTER, 1.0, 0.0), 256, 320)
        assert int(rect.sum()) == 20000
        ellipse = rasterize_type1(box, Type1Params(CHARACTER, 1.0, 1.0), 256, 320)
        assert abs(int(ellipse.sum()) - 15708) <= 0.01 * 15708


def test_monotonicity_suites():
    """Mask containment over 100 random pairs per suite, zero violations; < 10 s."""
    rng = np.random.default_rng(7)
    with budget(10):
        for _ in range(100):
            boxes, width, height = random_case(rng)
            chunk = int(rng.integers(0, 3))

            lo, hi = sorted(rng.uniform(1.0, 1.5, size=2))
            s_round = float(rng.uniform(0, 1))
            small = rasterize_type1(boxes, Type1Params(chunk, float(lo), s_round), width, height)
            big = rasterize_type1(boxes, Type1Params(chunk, float(hi), s_round), width, height)
            assert not np.any(small & ~big), "larger s_scale must contain smaller"

            r_lo, r_hi = sorted(rng.uniform(0.0, 1.0, size=2))
            s_scale = float(rng.uniform(1.0, 1.5))
            rounder = rasterize_type1(boxes, Type1Params(chunk, s_scale, float(r_hi)), width, height)
            boxier = rasterize_type1(boxes, Type1Params(chunk, s_scale, float(r_lo)), width, height)
            assert not np.any(rounder & ~boxier), "smaller s_round must contain larger"

        for _ in range(100):
            mask = rng.random((40, 40)) < 0.3
            kernel = int(rng.choice([3, 5, 7]))
            times = int(rng.integers(1, 6))
            grown = morphology(mask, times, kernel)
            assert not np.any(mask & ~grown), "dilation must be extensive"
            shrunk = morphology(mask, -times, kernel)
            assert not np.any(shrunk & ~mask), "erosion must be anti-extensive"


def test_morphology_matches_set_oracle():
    """All 44 (t_times, t_kernel) combos over 50 random 32x32 masks; < 10 s.

    The broad sweep runs against the union-of-translates set oracle; a
    sample of combos is additionally cross-checked against the literal
    coordinate-set oracle.
    """
    rng = np.random.default_rng(99)
    masks = [rng.random((32, 32)) < rng.uniform(0.1, 0.6) for _ in range(50)]
    combos = list(itertools.product(range(-5, 6), [1, 3, 5, 7]))
    assert len(combos) == 44
    with budget(10):
        for times, kernel in combos:
            for mask in masks:
                got = morphology(mask, times, kernel)
                want = morphology_shift_oracle(mask, times, kernel)
                assert np.array_equal(got, want), f"combo ({times}, {kernel}) diverged"
        for times, kernel in [(-3, 3), (1, 7), (5, 1), (-5, 5), (2, 5)]:
            for mask in masks[:3]:
                got = morphology(mask, times, kernel)
                want = morphology_set_oracle(mask, times, kernel)
                assert np.array_equal(got, want)


def test_initial_grids():
    """Exactly 27 three-way and 30 threshold grid points, stable order; < 1 s."""
    with budget(1):
        type1 = grid_init("type1")
        expected1 = [
            {"s_chunk": c, "s_scale": s, "s_round": r}
            for c, s, r in itertools.product([0, 1, 2], [1.0, 1.25, 1.5], [0.0, 0.5, 1.0])
        ]
        assert type1 == expected1
        assert len(type1) == 27

        type2 = grid_init("type2")
        expected2 = [
            {"t_thres": t, "t_times": m, "t_kernel": k}
            for t, m, k in itertools.product([15, 25, 35, 45, 55], [-3, 0, 3], [1, 7])
        ]
        assert type2 == expected2
        assert len(type2) == 30

        assert grid_init("type1") == type1 and grid_init("type2") == type2


def test_gp_and_acquisition():
    """Posterior within 1e-6 of a dense-algebra oracle on 10-point fits;
    acquisition nonnegative on 1e4 queries and <= 1e-9 at a zero-variance
    incumbent; < 30 s."""
    with budget(30):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            X = rng.random((10, 4))
            y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2 + 0.3 * rng.standard_normal(10)
            gp = fit_gp(X, y)
            queries = rng.random((20, 4))
            mean, var = gp.predict(queries)
            oracle_mean, oracle_var = gp_predict_oracle(gp, queries)
            assert np.max(np.abs(mean - oracle_mean)) <= 1e-6
            assert np.max(np.abs(var - oracle_var)) <= 1e-6

        rng = np.random.default_rng(123)
        best = 0.2
        mu = rng.normal(0, 2, size=10_000)
        sigma = np.abs(rng.normal(0, 1, size=10_000))
        sigma[::7] = 0.0
        ei = expected_improvement(mu, sigma, best)
        assert ei.shape == (10_000,)
        assert np.all(ei >= 0)

        at_best = expected_improvement(np.array([best]), np.array([0.0]), best)
        assert at_best[0] <= 1e-9


def test_end_to_end_study_improves(tmp_path):
    """8-image benchmark, 27-point grid plus 50 suggestions: best score
    improves >= 20% over the best grid point, best-so-far never rises;
    < 5 min."""
    with budget(300):
        manifest = generate_benchmark(tmp_path / "bench", n_images=8, seed=0)
        items = load_benchmark(manifest)
        space = space_for("type1")

        def evaluate(point):
            masks = [render_item_mask(item, "type1", point) for item in items]
            return synthetic_oracle(items, masks)

        store = TrialStore(tmp_path / "trials.jsonl")
        study = run_study(space, evaluate, grid_init("type1"), 50, seed=0, store=store)

        assert len(study.trials) == 77
        best_grid = min(t.score for t in study.trials[:27])
        best_final = min(t.score for t in study.trials)
        assert best_grid > 0
        improvement = (best_grid - best_final) / best_grid
        assert improvement >= 0.20, f"improved only {improvement:.1%}"

        curve = study.best_so_far()
        assert np.all(np.diff(curve) <= 0)


def test_determinism_and_resume(tmp_path, bench_dir):
    """Same seed gives byte-identical outputs; a crashed study resumes to
    the same bytes as an uninterrupted one."""
    def optimize(out, iters):
        code = main(
            [
                "optimize",
                "--manifest", str(bench_dir),
                "--model", "type1",
                "--iters", str(iters),
                "--seed", "4",
                "--out", str(out),
            ]
        )
        assert code == OK

    optimize(tmp_path / "a", 2)
    optimize(tmp_path / "b", 2)
    store_a = (tmp_path / "a" / "trials.jsonl").read_bytes()
    assert store_a == (tmp_path / "b" / "trials.jsonl").read_bytes()
    assert (tmp_path / "a" / "best_so_far.csv").read_bytes() == (
        tmp_path / "b" / "best_so_far.csv"
    ).read_bytes()

    # Interrupted run: the evaluator dies mid-grid, the store keeps the
    # completed prefix, and a rerun continues to identical bytes.
    items = load_benchmark(bench_dir)
    space = space_for("type1")

    def scored(point):
        masks = [render_item_mask(item, "type1", point) for item in items]
        return synthetic_oracle(items, masks)

    calls = {"n": 0}

    def crashing(point):
        if calls["n"] >= 11:
            raise RuntimeError("simulated crash")
        calls["n"] += 1
        return scored(point)

    straight = TrialStore(tmp_path / "straight.jsonl")
    run_study(space, scored, grid_init("type1"), 2, seed=4, store=straight)

    resumed = TrialStore(tmp_path / "resumed.jsonl")
    with pytest.raises(RuntimeError, match="simulated crash"):
        run_study(space, crashing, grid_init("type1"), 2, seed=4, store=resumed)
    assert len(resumed.load()) == 11
    run_study(space, scored, grid_init("type1"), 2, seed=4, store=resumed)
    assert resumed.path.read_bytes() == straight.path.read_bytes()

    # The CLI resumes the same way: a short run extended in place equals
    # a straight run of the full budget.
    optimize(tmp_path / "c", 0)
    optimize(tmp_path / "c", 2)
    assert (tmp_path / "c" / "trials.jsonl").read_bytes() == store_a


def test_reference_quadruple_round_trip(tmp_path):
    """A stored quadruple of published-style scores survives store, load
    and report export bit-exactly."""
    points = [
        {"s_chunk": 2, "s_scale": 1.0, "s_round": 0.5},
        {"s_chunk": 0, "s_scale": 1.0, "s_round": 0.5},
        {"s_chunk": 1, "s_scale": 1.25, "s_round": 1.0},
        {"s_chunk": 0, "s_scale": 1.25, "s_round": 0.5},
    ]
    scores = [135.95, 103.73, 71.70, 40.54]

    store = TrialStore(tmp_path / "trials.jsonl")
    for i, (point, score) in enumerate(zip(points, scores)):
        store.append(Trial(params=point, score=score, source="grid", iteration_index=i))

    loaded = store.load()
    assert [t.params for t in loaded] == points
    assert [t.score for t in loaded] == scores

    report = tmp_path / "report.csv"
    code = main(
        [
            "report",
            "--store", str(store.path),
            "--model", "type1",
            "--sweep", "s_scale",
            "--out", str(report),
        ]
    )
    assert code == OK
    rows = [line.split(",") for line in report.read_text().splitlines()[1:]]
    assert [(float(v), float(s)) for v, s in rows] == [
        (1.0, 135.95),
        (1.0, 103.73),
        (1.25, 71.70),
        (1.25, 40.54),
    ]
