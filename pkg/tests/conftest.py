import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import j1

from bcinverse import PRESETS, PotentialSpec

# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def bessel_r(t, c=1.0):
    """-sqrt(c) J1(sqrt(c) t)/t, the response of q = c, with r(0) = -c/2."""
    t = np.asarray(t, dtype=float)
    a = np.sqrt(c)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, -a * j1(a * safe) / safe, -c / 2)


def bessel_Phi(t, c=1.0):
    """Running integral of bessel_r by adaptive quadrature."""
    return np.array([quad(lambda s: float(bessel_r(s, c)), 0.0, float(x),
                          epsabs=1e-13, epsrel=1e-12)[0] for x in np.atleast_1d(t)])


@pytest.fixture
def const1():
    return PotentialSpec.constant(1.0)


@pytest.fixture(params=sorted(PRESETS))
def preset(request):
    return request.param, PRESETS[request.param]()


def rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
