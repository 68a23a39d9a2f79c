import logging
import math

import numpy as np
import pytest

from sluicepump import OhmicSpectrum, SluiceParams

# acceptance lines collected by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _quiet_integrator_logs():
    # positivity warnings are expected in most full-equation runs
    logging.getLogger("sluicepump").setLevel(logging.ERROR)
    yield


@pytest.fixture
def fig2_params():
    return SluiceParams.from_ratios(g=0.01, f=10e6)


@pytest.fixture
def fig5_params():
    return SluiceParams.from_ratios(
        jl_max_over_ec=0.1,
        jl_min_over_max=0.006,
        jr_max_over_ec=0.2,
        jr_min_over_max=0.04,
        dng_max=0.4,
        dng_min=-0.03,
        g=0.01,
        f=10e6,
    )


@pytest.fixture
def bath():
    return OhmicSpectrum(r=300e3, temp=0.0, t0=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


PHI_HALF = math.pi / 2
