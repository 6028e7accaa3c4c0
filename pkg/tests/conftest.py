from __future__ import annotations

import pytest

from grs_soliton import SolitonParams, compute_seed, integrate

FAMILY_ELLS = (-1.0, 0.0, 1.0, 2.0)

# filled by test_acceptance; printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ell0_params():
    return SolitonParams(ell=0.0, t_max=100.0)


@pytest.fixture(scope="session")
def ell0_run(ell0_params):
    return integrate(ell0_params)


@pytest.fixture(scope="session")
def brf_params():
    return SolitonParams(q=-0.5, t_max=10.0)


@pytest.fixture(scope="session")
def brf_run(brf_params):
    return integrate(brf_params)


@pytest.fixture(scope="session")
def family_runs():
    out = {}
    for ell in FAMILY_ELLS:
        p = SolitonParams(ell=ell, t_max=200.0)
        out[ell] = integrate(p, compute_seed(p))
    return out


@pytest.fixture(scope="session")
def long_run():
    return integrate(SolitonParams(ell=0.0, t_max=1e4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
