import numpy as np
import pytest

from masktune import generate_benchmark, load_benchmark


@pytest.fixture(scope="session")
def bench_dir(tmp_path_factory):
    """Small generated benchmark shared by tests that just need real items."""
    out = tmp_path_factory.mktemp("bench")
    manifest = generate_benchmark(out, n_images=2, seed=0)
    return manifest


@pytest.fixture(scope="session")
def bench_items(bench_dir):
    return load_benchmark(bench_dir)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
