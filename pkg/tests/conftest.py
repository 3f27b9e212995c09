import time
from functools import lru_cache

import numpy as np
import pytest

from cellrate.channel import CellScenario, RayleighPowerFading
from cellrate.montecarlo import SimConfig, simulate_single_cell
from cellrate.schedulers import Greedy, ProportionalFair, RoundRobin
from cellrate.singlecell import SingleCellAnalysis

SEED = 20140601
MC_DROPS = 1_000_000
KS_GRID = np.linspace(0.0, 25.0, 2501)


@pytest.fixture(scope="session")
def scenario():
    return CellScenario.case_study()


@pytest.fixture(scope="session")
def analysis(scenario):
    return SingleCellAnalysis(scenario, RayleighPowerFading())


@lru_cache(maxsize=None)
def single_cell_samples(name: str, drops: int = MC_DROPS, seed: int = SEED):
    """(rates, distances, seconds) for one scheduler for the case-study scenario."""
    sched = {"rr": RoundRobin(), "greedy": Greedy(), "pf": ProportionalFair()}[name]
    t0 = time.perf_counter()
    rate, dist = simulate_single_cell(SimConfig(seed, drops, CellScenario.case_study(),
                                                scheduler=sched))
    return rate, dist, time.perf_counter() - t0


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


CRITERIA = []


def report(number: int, name: str, passed: bool, detail: str):
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {name}: {detail}"
    CRITERIA.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
