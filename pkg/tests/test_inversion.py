import math

import numpy as np
import pytest

from bcinverse import PRESETS, PotentialSpec
from bcinverse.dynamics import ResponseFunction, connecting_kernel, response_function
from bcinverse.errors import AllTracesVanish, InvalidGrid
from bcinverse.inversion import boundary_trace_curve, krein_solve, recover_potential
from bcinverse.numerics import Grid1D

H = 1 / 200


def _zero_response(T_max=1.0, h=H):
    return ResponseFunction.from_values(2 * T_max, np.zeros(int(round(2 * T_max / h)) + 1))


def test_krein_zero_potential():
    res = krein_solve(connecting_kernel(_zero_response(), 1.0), 0.0)
    t = res.control.grid.nodes
    assert np.max(np.abs(res.control.values - (1 - t))) < 1e-14
    assert res.trace == pytest.approx(1.0, abs=1e-14)
    res = krein_solve(connecting_kernel(_zero_response(), 1.0), math.pi**2)
    assert abs(res.trace) < 1e-14


def test_krein_constant_sinh():
    r = response_function(PotentialSpec.constant(1.0), 2.0, H)
    res = krein_solve(connecting_kernel(r, 1.0), 0.0)
    assert res.trace == pytest.approx(math.sinh(1.0), abs=1e-3)
    assert res.residual < 1e-10


def test_trace_curves():
    Ts = Grid1D(0.1, 1.0, 10)
    y = boundary_trace_curve(_zero_response(), 0.0, Ts, threads=1)
    assert np.allclose(y.values, Ts.nodes, atol=1e-13)
    r = response_function(PotentialSpec.constant(1.0), 2.0, H)
    y = boundary_trace_curve(r, 0.0, Ts, threads=2)
    assert np.max(np.abs(y.values - np.sinh(Ts.nodes))) < 1e-3
    y4 = boundary_trace_curve(r, 4.0, [0.25, 0.5], threads=1)
    assert np.allclose(y4.values, np.sin(np.sqrt(3) * np.array([0.25, 0.5])) / np.sqrt(3),
                       atol=1e-3)


def _recover(q, T_max=1.0, h=H, dT=0.01, **kw):
    r = response_function(q, 2 * T_max, h)
    rec = recover_potential(r, Grid1D(dT, T_max, int(round(T_max / dT))), **kw)
    x = rec.x
    sel = (x >= 0.1 * T_max) & (x <= 0.9 * T_max)
    return rec, x[sel], rec.q[sel], q(x[sel])


def test_recover_zero():
    rec, x, got, ref = _recover(PotentialSpec.zero())
    assert np.max(np.abs(got)) <= 10 * H
    assert rec.dropped == 2 and rec.x.size == 96


def test_recover_constant():
    _, _, got, ref = _recover(PotentialSpec.constant(1.0))
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) <= 0.05


@pytest.mark.parametrize("name", ["smooth_bump", "shallow_well"])
def test_recover_presets(name):
    _, _, got, ref = _recover(PRESETS[name](), h=1 / 400)
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) <= 0.10


def test_threads_do_not_change_result():
    r = response_function(PRESETS["smooth_bump"](), 2.0, H)
    Ts = Grid1D(0.05, 1.0, 20)
    a = recover_potential(r, Ts, threads=1)
    b = recover_potential(r, Ts, threads=4)
    assert np.array_equal(a.q, b.q)


def test_all_traces_vanish():
    # y(T, pi^2) = sin(pi T)/pi vanishes at T = 1 for q = 0
    r = _zero_response(1.5)
    with pytest.raises(AllTracesVanish) as exc:
        recover_potential(r, Grid1D(0.9, 1.2, 7), lambdas=(math.pi**2,))
    assert exc.value.node_index == 2


def test_recover_rejects_bad_grids():
    r = _zero_response()
    with pytest.raises(InvalidGrid):
        recover_potential(r, [0.2, 0.4, 0.6, 0.8])
    with pytest.raises(InvalidGrid):
        recover_potential(r, [0.1, 0.2, 0.4, 0.5, 0.6])
    with pytest.raises(ValueError):
        recover_potential(r, Grid1D(0.1, 0.5, 5), lambdas=())


def test_lambda_independence_constant():
    q = PotentialSpec.constant(1.0)
    r = response_function(q, 2.0, H)
    Ts = Grid1D(0.01, 1.0, 100)
    a = recover_potential(r, Ts, lambdas=(0.0,))
    b = recover_potential(r, Ts, lambdas=(4.0,))
    sel = (a.x >= 0.1) & (a.x <= 0.9)
    bound = max(np.max(np.abs(a.q[sel] - 1)), np.max(np.abs(b.q[sel] - 1)))
    assert np.all(b.lambda_used == 4.0)
    assert np.max(np.abs(a.q[sel] - b.q[sel])) <= 2 * bound
    assert bound < 1e-3
