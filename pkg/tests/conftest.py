import numpy as np
import pytest

from energywalk import TransitionRates, gaussian_population

ACCEPTANCE_RESULTS = []

BASE_RATES = (0.2, 0.1, 0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def biased_rates():
    def make(levels=21):
        return TransitionRates.constant(*BASE_RATES, levels)
    return make


@pytest.fixture
def cold_gaussian():
    def make(levels=21):
        return gaussian_population(2, 2, levels)
    return make


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {name}: {detail}")
