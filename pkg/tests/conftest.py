import math

import pytest

from stickslip import Params, StribeckConstants, coulomb_law, stribeck_law

from oracles import rk4_below, rk4_coulomb_below


@pytest.fixture(scope="session")
def pstar():
    """Reference Stribeck point: alpha=0.3, beta=0.1, gamma=2, c=0.5, V=0.5."""
    return StribeckConstants(0.3, 0.1, 2.0), Params(0.5, 0.5, 0.01)


@pytest.fixture(scope="session")
def pstar_law(pstar):
    return stribeck_law(pstar[0])


@pytest.fixture(scope="session")
def coulomb_rk4():
    """Fixed-step RK4 (h = 1e-5) run of the Coulomb grazing orbit, c=1, V=0.5, eps=0.01."""
    p = Params(1.0, 0.5, 0.01)
    best, t_ret = rk4_coulomb_below(p.exit_point, p.V, p.c, p.V, p.epsilon, 6 * math.pi)
    return p, best, t_ret


@pytest.fixture(scope="session")
def pstar_rk4(pstar, pstar_law):
    _, p = pstar
    return rk4_below(p.exit_point, p.V, p.c, p.V, p.epsilon, pstar_law.eval, 6 * math.pi)


@pytest.fixture
def coulomb():
    return coulomb_law()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
