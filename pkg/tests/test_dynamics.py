import numpy as np
import pytest
from scipy.integrate import solve_ivp

from bcinverse import PRESETS, PotentialSpec
from bcinverse.dynamics import (ResponseFunction, apply_control, apply_control_adjoint,
                                apply_response, connecting_kernel, control_matrix,
                                response_from_kernel, response_function, solve_goursat)
from bcinverse.errors import DomainMismatch, InvalidControl, NonFiniteValues
from bcinverse.inversion import krein_solve
from bcinverse.numerics import Grid1D, SampledFunction, quadrature_weights, sine_kernel
from conftest import bessel_r

H = 1 / 200


def test_zero_potential_kernel_and_response():
    q = PotentialSpec.zero()
    assert np.all(solve_goursat(q, 1.0, H).values == 0)
    assert np.all(response_function(q, 2.0, H).values == 0)


def test_constant_diagonal_exact():
    w = solve_goursat(PotentialSpec.constant(1.0), 1.0, H)
    x = w.grid.nodes
    assert np.max(np.abs(w.diagonal() + x / 2)) < 1e-15
    assert np.all(w.values[0] == 0)


def test_constant_response_matches_bessel():
    r = response_function(PotentialSpec.constant(1.0), 2.0, H)
    t = r.grid.nodes
    assert np.max(np.abs(r.values - bessel_r(t))) < 5e-3
    assert r.values[0] == -0.5


@pytest.mark.parametrize("c", [0.5, 2.0, 4.0])
def test_constant_response_scaling(c):
    r = response_function(PotentialSpec.constant(c), 2.0, H)
    assert np.max(np.abs(r.values - bessel_r(r.grid.nodes, c))) < 5e-3
    assert abs(r.values[0] + c / 2) < 1e-15


def test_response_streaming_matches_full_kernel():
    q = PRESETS["deep_well"]()
    a = response_function(q, 2.0, H).values
    b = response_from_kernel(solve_goursat(q, 2.0, H)).values
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("name", ["deep_well", "shallow_well", "barrier"])
def test_response_at_origin(name):
    q = PRESETS[name]()
    r = response_function(q, 1.0, H)
    # r(0+) = -q(0)/2 within 5h, read off the first interior node
    assert abs(r.values[1] + q(0.0) / 2) <= 5 * H


def test_second_order_convergence():
    q = PotentialSpec.constant(1.0)
    errs = []
    for h in (1 / 50, 1 / 100, 1 / 200):
        r = response_function(q, 2.0, h)
        errs.append(np.max(np.abs(r.values - bessel_r(r.grid.nodes))))
    assert errs[0] / errs[1] >= 3 and errs[1] / errs[2] >= 3


def test_kernel_refinement_is_second_order():
    q = PRESETS["shallow_well"]()
    w = [solve_goursat(q, 1.0, h).values for h in (1 / 40, 1 / 80, 1 / 160)]
    d1 = np.max(np.abs(w[0] - w[1][::2, ::2]))
    d2 = np.max(np.abs(w[1] - w[2][::2, ::2]))
    assert d1 / d2 > 3


def test_goursat_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_goursat(PotentialSpec.zero(), 0.0, H)
    with pytest.raises(ValueError):
        solve_goursat(PotentialSpec.zero(), 1.0, 0.3)

    class Bad:
        def __call__(self, x):
            return np.full(np.shape(x), np.nan)
    with pytest.raises(NonFiniteValues):
        solve_goursat(Bad(), 1.0, 0.1)


def _grid(T=1.0, h=H):
    return Grid1D.from_step(0.0, T, h)


def test_apply_response_trivial():
    g = _grid()
    t = g.nodes
    r0 = ResponseFunction.from_values(1.0, np.zeros(g.count))
    out = apply_response(r0, SampledFunction(g, t**2))
    assert np.max(np.abs(out.values + 2 * t)) < 1e-12
    r1 = response_function(PotentialSpec.constant(1.0), 1.0, H)
    assert np.all(apply_response(r1, SampledFunction(g, np.zeros(g.count))).values == 0)


def test_apply_response_rejects_bad_controls():
    g = _grid()
    r = ResponseFunction.from_values(1.0, np.zeros(g.count))
    with pytest.raises(InvalidControl):
        apply_response(r, SampledFunction(g, g.nodes))
    with pytest.raises(DomainMismatch):
        apply_response(r, SampledFunction(Grid1D(0.0, 2.0, 11), np.zeros(11)))


def _fd_boundary_flux(q, f, t_max, dx):
    """u_tt - u_xx + q u = 0, u(0, t) = f(t), zero initial data; returns u_x(0, t)."""
    L = t_max + 0.5
    nx = int(round(L / dx)) + 1
    x = dx * np.arange(nx)
    qv = q(x)
    nt = int(round(t_max / dx))
    u0 = np.zeros(nx)
    u1 = np.zeros(nx)
    u1[0] = f(dx)
    flux = [0.0, (-3 * u1[0] + 4 * u1[1] - u1[2]) / (2 * dx)]
    for n in range(1, nt):
        u2 = np.empty(nx)
        u2[1:-1] = u1[2:] + u1[:-2] - u0[1:-1] - dx * dx * qv[1:-1] * u1[1:-1]
        u2[0] = f((n + 1) * dx)
        u2[-1] = 0.0
        flux.append((-3 * u2[0] + 4 * u2[1] - u2[2]) / (2 * dx))
        u0, u1 = u1, u2
    return dx * np.arange(nt + 1), np.array(flux)


def test_apply_response_matches_fd_wave_solve():
    q = PotentialSpec.constant(1.0)
    g = _grid()
    r = response_function(q, 1.0, H)
    Rf = apply_response(r, SampledFunction(g, g.nodes**2))
    t, flux = _fd_boundary_flux(q, lambda s: s * s, 1.0, 1 / 2000)
    assert np.max(np.abs(np.interp(g.nodes, t, flux) - Rf.values)) < 5e-3


def test_control_zero_potential_is_shift():
    w = solve_goursat(PotentialSpec.zero(), 1.0, H)
    g = w.grid
    f = SampledFunction(g, np.sin(3 * g.nodes) * g.nodes**2)
    out = apply_control(w, f)
    assert np.max(np.abs(out.values - f.values[::-1])) < 1e-15
    assert np.all(apply_control(w, SampledFunction(g, np.zeros(g.count))).values == 0)


def test_krein_control_drives_sinh():
    # the lambda = 0 Krein control steers the wave to y with -y'' + y = 0, y(0) = 0, y'(0) = 1
    q = PotentialSpec.constant(1.0)
    T = 1.0
    w = solve_goursat(q, T, H)
    r = response_function(q, 2 * T, H)
    res = krein_solve(connecting_kernel(r, T), 0.0)
    y = apply_control(w, res.control)
    assert np.max(np.abs(y.values - np.sinh(w.grid.nodes))) < 1e-3


def test_connecting_kernel_examples():
    T = 1.0
    g = _grid(2.0)
    assert np.all(connecting_kernel(ResponseFunction.from_values(2.0, np.zeros(g.count)),
                                    T).entries == 0)
    c = connecting_kernel(ResponseFunction.from_values(2.0, np.ones(g.count)), T)
    t = c.grid.nodes
    ref = 0.5 * ((2 - t[:, None] - t[None, :]) - np.abs(t[:, None] - t[None, :]))
    assert np.max(np.abs(c.entries - ref)) < 1e-13
    assert np.array_equal(c.entries, c.entries.T)


def test_connecting_kernel_half_integral_form():
    # c^T(T - t, T - s) = (1/2) int_{|t - s|}^{t + s} r
    T = 1.0
    r = response_function(PotentialSpec.constant(1.0), 2 * T, H)
    c = connecting_kernel(r, T).entries
    n = c.shape[0] - 1
    Phi = r.Phi()
    i = np.arange(n + 1)
    ref = 0.5 * (Phi[i[:, None] + i[None, :]] - Phi[np.abs(i[:, None] - i[None, :])])
    assert np.max(np.abs(c[n - i[:, None], n - i[None, :]] - ref)) < 1e-10


def _controls(t):
    return t**2 * np.sin(3 * t), t**3 * np.exp(-t)


@pytest.mark.parametrize("name", ["barrier", "deep_well", "shallow_well", "smooth_bump"])
def test_gram_identity(name):
    q = PRESETS[name]()
    T = 1.0
    w = solve_goursat(q, T, H)
    c = connecting_kernel(response_function(q, 2 * T, H), T)
    t = w.grid.nodes
    wt = quadrature_weights(w.grid)
    f, g = _controls(t)
    lhs = np.dot(wt, (f + c.entries @ (wt * f)) * g)
    A = control_matrix(w)
    rhs = np.dot(wt, (A @ f) * (A @ g))
    assert abs(lhs - rhs) <= 1e-3 * abs(rhs)


@pytest.mark.parametrize("name", ["deep_well", "barrier"])
def test_transformation_property_with_ode_oracle(name):
    q = PRESETS[name]()
    T = 1.0
    w = solve_goursat(q, T, H)
    t = w.grid.nodes
    for lam in (0.0, 1.0, 4.0):
        sol = solve_ivp(lambda x, y: [y[1], (q(x) - lam) * y[0]], [0, T], [0.0, 1.0],
                        t_eval=t, rtol=1e-11, atol=1e-12)
        lhs = apply_control_adjoint(w, SampledFunction(w.grid, sol.y[0])).values
        assert np.max(np.abs(lhs - sine_kernel(lam, T - t))) < 1e-3
