import math

import numpy as np
import pytest

from qlga import LatticeSpec, RuleParams

MASSIVE = RuleParams(math.pi / 3, math.pi / 4)
MASSLESS = RuleParams(math.pi / 6, math.pi / 6)


@pytest.fixture
def massive():
    return MASSIVE


@pytest.fixture
def massless():
    return MASSLESS


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=[4, 8, 32])
def lattice(request):
    return LatticeSpec(request.param)


def brute_force_step(amps, rule, phi):
    """Site-by-site evaluation of one step; the reference for vectorized code."""
    N = amps.shape[0]
    out = np.zeros_like(amps)
    for x in range(N):
        acc = (
            rule.w_minus @ amps[(x - 1) % N]
            + rule.w_zero @ amps[x]
            + rule.w_plus @ amps[(x + 1) % N]
        )
        out[x] = np.exp(-1j * phi[x]) * acc
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
