import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from bcinverse import PRESETS, PotentialSpec
from bcinverse.checks import jost_connection, parseval
from bcinverse.dynamics import response_function
from bcinverse.errors import IncompleteData, SearchGridTooCoarse, UnboundedSupport
from bcinverse.numerics import Grid1D
from bcinverse.scattering import (bound_states, connection_residual, jost_function,
                                  jost_solution, response_from_scattering, scattering_data,
                                  scattering_matrix)

K_GRID = Grid1D(0.5, 10.0, 96)

# deep well bound state from a dense finite-difference eigenproblem on [0, 40]
# with Richardson extrapolation in the mesh size
K1_FD = 1.37228127007
C1_FD = 5.503797542


def test_zero_potential_scattering():
    d = scattering_matrix(PotentialSpec.zero(), K_GRID)
    assert np.all(d.M == 1) and np.all(d.S == 1)
    assert bound_states(PotentialSpec.zero(), 3.0) == []


@pytest.mark.parametrize("name", ["barrier", "deep_well", "shallow_well"])
def test_unitarity_and_high_k(name):
    q = PRESETS[name]()
    d = scattering_matrix(q, Grid1D(0.5, 200.0, 400))
    assert np.max(np.abs(np.abs(d.S) - 1)) < 1e-8
    assert abs(d.U[-1] - 1) < 1e-3
    # M(k) ~ 1 + i int q / (2k) for large k
    assert d.eta[-1] * d.k[-1] == pytest.approx(q.total_mass() / 2, rel=1e-2)


def test_two_jost_solvers_agree():
    q = PRESETS["deep_well"]()
    k = np.array([0.7, 2.0, 6.0])
    cp = jost_function(q, k.astype(complex))
    rk = np.array([jost_solution(q, kk, np.array([0.0]))[0] for kk in k])
    assert np.max(np.abs(cp - rk)) < 1e-8


def test_jost_solution_outside_support():
    q = PRESETS["barrier"]()
    x = Grid1D(0.0, 3.0, 301)
    e = jost_solution(q, 2.5, x).values
    out = x.nodes >= 1.0
    assert np.max(np.abs(e[out] - np.exp(2.5j * x.nodes[out]))) < 1e-14


def test_barrier_has_no_bound_states():
    d = scattering_data(PRESETS["barrier"](), K_GRID)
    assert d.bound == ()
    assert d.bound_searched


def _ode_bound_state(q, a):
    def end(kappa):
        sol = solve_ivp(lambda x, y: [y[1], (q(x) + kappa**2) * y[0]], [a, 0],
                        [math.exp(-kappa * a), -kappa * math.exp(-kappa * a)],
                        rtol=1e-12, atol=1e-14, method="DOP853")
        return sol.y[0, -1]
    kappa = brentq(end, 0.5, 2.5, xtol=1e-14)
    sol = solve_ivp(lambda x, y: [y[1], (q(x) + kappa**2) * y[0], y[0] ** 2], [a, 0],
                    [math.exp(-kappa * a), -kappa * math.exp(-kappa * a), 0.0],
                    rtol=1e-12, atol=1e-14, method="DOP853")
    norm = -sol.y[2, -1] + math.exp(-2 * kappa * a) / (2 * kappa)
    return kappa, 1 / math.sqrt(norm)


def test_deep_well_bound_state():
    q = PRESETS["deep_well"]()
    b = bound_states(q, 4.0)
    assert len(b) == 1
    assert b[0].k == pytest.approx(K1_FD, rel=1e-9)
    assert b[0].C == pytest.approx(C1_FD, rel=1e-7)
    k, C = _ode_bound_state(q, q.support)
    assert b[0].k == pytest.approx(k, rel=1e-9)
    assert b[0].C == pytest.approx(C, rel=1e-7)


def test_search_grid_too_coarse():
    with pytest.raises(SearchGridTooCoarse):
        bound_states(PRESETS["deep_well"](), 4.0, n_grid=1)


def test_unbounded_support_rejected():
    with pytest.raises(UnboundedSupport):
        scattering_matrix(PRESETS["smooth_bump"](), K_GRID)


def test_response_needs_bound_search():
    d = scattering_matrix(PRESETS["barrier"](), Grid1D(0.1, 10.0, 100))
    with pytest.raises(IncompleteData):
        response_from_scattering(d, Grid1D(0.0, 1.0, 11))
    with pytest.raises(ValueError):
        response_from_scattering(d.with_bound_states([]), Grid1D(0.0, 1.0, 11), mode="x")


@pytest.mark.parametrize("name", ["barrier", "deep_well", "shallow_well"])
def test_connection_formula(name):
    res = jost_connection(PRESETS[name]())
    assert res.passed
    assert connection_residual(PRESETS[name](), 3.0, Grid1D(0.0, 2.0, 201)) < 1e-6


def _scattering_response(name, mode):
    q = PRESETS[name]()
    d = scattering_data(q, Grid1D(0.05, 200.0, 4000))
    r = response_function(q, 1.5, 1 / 200)
    rs = response_from_scattering(d, r.grid, mode)
    return float(np.max(np.abs(rs.values - r.values)))


def test_scattering_bridge_barrier():
    assert _scattering_response("barrier", "measure_consistent") <= 1e-2


def test_deep_well_mode_adjudication():
    good = _scattering_response("deep_well", "measure_consistent")
    printed = _scattering_response("deep_well", "as_printed")
    assert good <= 1e-2
    assert printed > 1.0


@pytest.mark.parametrize("name", ["zero", "deep_well"])
def test_parseval(name):
    res = parseval(PRESETS[name]())
    assert res.difference <= 1e-2
