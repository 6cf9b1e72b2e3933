import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from consistreg import (
    CvConfig,
    ModelKind,
    SynthConfig,
    gen_synthetic,
    median_heuristic,
    sweep_mu,
    train_test_split,
)

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

_SESSION_START = time.monotonic()

# pinned reference benchmark: synthetic data emulating the scale of the
# motivating retrieval experiment, with a 70/30 split
BENCH_CFG = SynthConfig(n=200, d=20, q=4, overlap=4, noise_std=0.1, seed=42)
BENCH_SPLIT_SEED = 7
ACCEPT_MU_GRID = (0.0,) + tuple(10.0**k for k in range(-2, 11))


@pytest.fixture(scope="session")
def bench_data():
    ds = gen_synthetic(BENCH_CFG)
    return train_test_split(ds, 0.3, BENCH_SPLIT_SEED)


@pytest.fixture(scope="session")
def bench_cv_config(bench_data):
    train, _ = bench_data
    med = median_heuristic(train.x)
    return CvConfig(
        k_folds=5,
        seed=0,
        lambda_grid=(1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0),
        bandwidth_grid=(0.5 * med, med, 2.0 * med, 4.0 * med),
    )


@pytest.fixture(scope="session")
def bench_sweeps(bench_data, bench_cv_config):
    """CV-driven trade-off curves for both models on the reference benchmark."""
    train, test = bench_data
    curves = {}
    for kind in (ModelKind.CLR, ModelKind.CKR):
        curves[kind] = sweep_mu(train, test, ACCEPT_MU_GRID, bench_cv_config, kind)
    return curves


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.monotonic() - _SESSION_START
    status = "PASS" if elapsed < 60.0 else "FAIL"
    terminalreporter.write_line(
        f"[criterion 10] full test suite runtime {elapsed:.1f}s (< 60 s): {status}"
    )


def random_problem(seed, n_max=100, multi_output=False):
    """Seeded random fit problem with benign conditioning."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, n_max + 1))
    d = int(rng.integers(2, 8))
    q = int(rng.integers(1, 4))
    c = 2 if multi_output and rng.integers(0, 2) else 1
    x = rng.standard_normal((n, d))
    s = rng.standard_normal((n, q))
    y = rng.standard_normal((n, c))
    lam = float(10.0 ** rng.uniform(-3, 1))
    return x, s, y, lam
