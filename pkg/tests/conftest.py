import time

import numpy as np
import pytest

from phasefront import run_simulation, run_spike
from phasefront.config import load_spec


class TimedRun:
    def __init__(self, trace, seconds):
        self.trace = trace
        self.seconds = seconds


@pytest.fixture(scope="session")
def fig6_run() -> TimedRun:
    """The beam-heated slab run shared by most acceptance criteria."""
    spec = load_spec("paper_fig6_thickness")
    start = time.perf_counter()
    trace = run_simulation(spec.config)
    return TimedRun(trace, time.perf_counter() - start)


@pytest.fixture(scope="session")
def classical_run() -> TimedRun:
    """Boundary-driven melting with no volumetric source."""
    spec = load_spec("classical_control")
    start = time.perf_counter()
    trace = run_simulation(spec.config)
    return TimedRun(trace, time.perf_counter() - start)


@pytest.fixture(scope="session")
def spike_run() -> TimedRun:
    spec = load_spec("spike_toy_metal")
    start = time.perf_counter()
    trace = run_spike(spec.config)
    return TimedRun(trace, time.perf_counter() - start)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
