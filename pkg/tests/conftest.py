import sys
import time

import pytest

from zsclab.anyplay import AnyPlayConfig, train_anyplay
from zsclab.env import make_env
from zsclab.qlearn import TrainConfig, train_baseline

SEEDS = range(10)


@pytest.fixture(scope="session")
def env():
    return make_env()


@pytest.fixture(scope="session")
def baseline_runs(env):
    """Ten default baseline runs plus their wall time."""
    t0 = time.perf_counter()
    runs = [train_baseline(env, TrainConfig(seed=s)) for s in SEEDS]
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def anyplay4_runs(env):
    t0 = time.perf_counter()
    runs = [train_anyplay(env, TrainConfig(seed=s), AnyPlayConfig(num_intents=4)) for s in SEEDS]
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def anyplay1_runs(env):
    return [train_anyplay(env, TrainConfig(seed=s), AnyPlayConfig(num_intents=1)) for s in SEEDS]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
