import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from bcinverse import PRESETS, PotentialSpec
from bcinverse.checks import inverse_transformation, spectral_bridge
from bcinverse.dynamics import ResponseFunction, connecting_kernel, response_function
from bcinverse.errors import HorizonExceeded, MismatchedTruncation
from bcinverse.numerics import Grid1D, sine_kernel
from bcinverse.spectral import (RegularizedSpectralMeasure, Phi_from_sigma, build_sigma_d,
                                connecting_kernel_from_sigma, dirichlet_eigendata, krein_Phi,
                                levitan_partial_sums, reference_eigendata, response_from_sigma,
                                with_asymptotic_tail)
from conftest import bessel_Phi


def _sigma(L, N=2000):
    q = PotentialSpec.constant(1.0)
    return build_sigma_d(dirichlet_eigendata(q, L, N=N), reference_eigendata(L, N=N))


@pytest.fixture(scope="module")
def sigma_const():
    return _sigma(1.0)


@pytest.fixture(scope="module")
def sigma_wide():
    # eigen-interval 1.25 T keeps t + s < 2L on [0, T]^2, away from the far-end echo
    return _sigma(1.25)


def test_free_eigendata():
    e = dirichlet_eigendata(PotentialSpec.zero(), 1.0, N=3)
    lam = np.array([1, 4, 9]) * math.pi**2
    assert np.allclose(e.lambdas, lam, rtol=1e-12)
    assert np.allclose(e.weights, 2 * lam, rtol=1e-10)
    e2 = dirichlet_eigendata(PotentialSpec.zero(), 2.0, N=1)
    assert e2.lambdas[0] == pytest.approx(math.pi**2 / 4, rel=1e-12)


def test_constant_shifts_eigenvalues_only():
    c = 3.0
    e0 = dirichlet_eigendata(PotentialSpec.zero(), 1.0, N=10)
    ec = dirichlet_eigendata(PotentialSpec.constant(c), 1.0, N=10)
    assert np.allclose(ec.lambdas, e0.lambdas + c, rtol=1e-12)
    assert np.allclose(ec.weights, e0.weights, rtol=1e-9)


def test_eigenvalues_against_shooting_oracle():
    q = PRESETS["shallow_well"]()

    def end_value(lam):
        sol = solve_ivp(lambda x, y: [y[1], (q(x) - lam) * y[0]], [0, 1], [0.0, 1.0],
                        rtol=1e-13, atol=1e-14, method="DOP853")
        return sol.y[0, -1]
    e = dirichlet_eigendata(q, 1.0, N=3)
    for lam in e.lambdas:
        ref = brentq(end_value, lam - 0.5, lam + 0.5, xtol=1e-14)
        assert abs(lam - ref) <= 1e-8 * abs(ref)


def test_deep_well_negative_eigenvalue():
    e = dirichlet_eigendata(PRESETS["deep_well"](), 12.0, N=4)
    assert e.lambdas[0] < 0
    # the box eigenvalue approaches the half-line bound state -k1^2
    assert e.lambdas[0] == pytest.approx(-1.37228127007**2, rel=1e-6)


def test_neumann_reference():
    e = reference_eigendata(1.0, "neumann", 3)
    assert np.allclose(e.lambdas, ((np.arange(1, 4) - 0.5) * math.pi) ** 2)
    n = dirichlet_eigendata(PotentialSpec.zero(), 1.0, "neumann", 3)
    assert np.allclose(n.lambdas, e.lambdas, rtol=1e-12)
    assert np.allclose(n.weights, e.weights, rtol=1e-9)


def test_weyl_law_count():
    q = PRESETS["deep_well"]()
    T = 2.0
    e = dirichlet_eigendata(q, T, N=200)
    for Lam in (1e3, 1e4, 1e5):
        count = np.sum(e.lambdas < Lam)
        assert abs(count - T * math.sqrt(Lam) / math.pi) <= 2


def test_reference_mass_counting():
    T = 1.0
    Lam = (50 * math.pi / T) ** 2
    ref = reference_eigendata(T, N=60)
    mass = np.sum(ref.weights[ref.lambdas < Lam])
    assert abs(mass / (2 / (3 * math.pi) * Lam**1.5) - 1) <= 0.05


def test_sigma_d_structure():
    q = PotentialSpec.constant(1.0)
    s = build_sigma_d(dirichlet_eigendata(q, 1.0, N=3), reference_eigendata(1.0, N=3))
    n = np.arange(1, 4)
    assert np.allclose(s.lambdas[0::2], n**2 * math.pi**2 + 1, rtol=1e-12)
    assert np.allclose(s.lambdas[1::2], n**2 * math.pi**2)
    assert np.allclose(s.weights[0::2], 2 * n**2 * math.pi**2, rtol=1e-9)
    assert s.signs.tolist() == [1, -1, 1, -1, 1, -1]


def test_sigma_d_cancels_for_identical_data():
    ref = reference_eigendata(1.0, N=5)
    s = build_sigma_d(ref, ref)
    assert s.net().lambdas.size == 0
    one = build_sigma_d(dirichlet_eigendata(PotentialSpec.zero(), 1.0, N=1),
                        reference_eigendata(1.0, N=1))
    assert one.lambdas[0] == pytest.approx(one.lambdas[1], rel=1e-12)
    assert one.weights[0] == pytest.approx(one.weights[1], rel=1e-9)


def test_sigma_d_rejects_mismatch():
    with pytest.raises(MismatchedTruncation):
        build_sigma_d(reference_eigendata(1.0, N=3), reference_eigendata(1.0, N=4))
    with pytest.raises(MismatchedTruncation):
        build_sigma_d(reference_eigendata(1.0, N=3), reference_eigendata(2.0, N=3))


def _empty(T=1.0):
    return RegularizedSpectralMeasure.custom([], [], [], T)


def test_empty_measure_gives_zeros():
    g = Grid1D(0.0, 2.0, 41)
    assert np.all(response_from_sigma(_empty(), g).values == 0)
    assert np.all(connecting_kernel_from_sigma(_empty(), 1.0).entries == 0)
    assert levitan_partial_sums(_empty(), 0.3, 0.4, [1, 2]) == [0.0, 0.0]


def test_single_atom():
    s = RegularizedSpectralMeasure.custom([4.0], [1.0], [1], 1.0)
    g = Grid1D(0.0, 2.0, 41)
    assert np.allclose(response_from_sigma(s, g).values, np.sin(2 * g.nodes) / 2, atol=1e-15)
    c = connecting_kernel_from_sigma(s, 1.0, Grid1D(0.0, 1.0, 11))
    t = c.grid.nodes
    ref = sine_kernel(4.0, 1 - t)[:, None] * sine_kernel(4.0, 1 - t)[None, :]
    assert np.allclose(c.entries, ref, atol=1e-15)
    ps = levitan_partial_sums(s, 0.2, 0.6, [1, 2, 5])
    assert ps[0] == ps[1] == ps[2]


def test_horizon_guard():
    with pytest.raises(HorizonExceeded):
        response_from_sigma(_empty(1.0), Grid1D(0.0, 2.5, 11))
    with pytest.raises(HorizonExceeded):
        connecting_kernel_from_sigma(_empty(1.0), 1.5)


def test_Phi_from_sigma_matches_bessel(sigma_const):
    g = Grid1D(0.0, 1.8, 37)
    Phi = Phi_from_sigma(sigma_const, g).values
    assert np.max(np.abs(Phi - bessel_Phi(g.nodes))) <= 1e-3
    # the raw atom sum oscillates but its running integral is the same object
    r = response_from_sigma(sigma_const, Grid1D(0.0, 1.8, 3601))
    assert r.oscillatory


def test_connecting_kernel_bridge_constant(sigma_wide):
    r = response_function(PotentialSpec.constant(1.0), 2.0, 1 / 200)
    dyn = connecting_kernel(r, 1.0)
    spec = connecting_kernel_from_sigma(sigma_wide, 1.0, dyn.grid)
    assert np.max(np.abs(spec.entries - dyn.entries)) <= 1e-3


def test_levitan_sums_converge(sigma_const):
    r = response_function(PotentialSpec.constant(1.0), 2.0, 1 / 200)
    c = connecting_kernel(r, 1.0).entries[80, 140]
    ps = levitan_partial_sums(sigma_const, 0.4, 0.7, [10, 50, 200, 800, 2000])
    err = np.abs(np.array(ps) - c)
    assert np.all(np.diff(err) < 0)
    with pytest.raises(ValueError):
        levitan_partial_sums(sigma_const, 0.4, 0.7, [50, 10])


def test_asymptotic_tail_improves_bridge(sigma_wide):
    r = response_function(PotentialSpec.constant(1.0), 2.0, 1 / 200)
    dyn = connecting_kernel(r, 1.0)
    raw = connecting_kernel_from_sigma(sigma_wide, 1.0, dyn.grid).entries
    tailed = connecting_kernel_from_sigma(with_asymptotic_tail(sigma_wide), 1.0, dyn.grid).entries
    assert np.max(np.abs(tailed - dyn.entries)) < 0.5 * np.max(np.abs(raw - dyn.entries))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_pipeline_equality_presets(name):
    assert spectral_bridge(PRESETS[name](), N=2000).passed


@pytest.mark.parametrize("lam", [1.0, 4.0])
def test_inverse_transformation_constant(lam):
    res = inverse_transformation(PotentialSpec.constant(1.0), lambdas=(lam,))
    assert res.difference <= 1e-3


def test_krein_Phi():
    g = Grid1D(0.0, 2.0, 201)
    assert np.all(krein_Phi(ResponseFunction.from_values(2.0, np.zeros(201))).values == 0)
    one = krein_Phi(ResponseFunction.from_values(2.0, np.ones(201)))
    assert np.allclose(one.values, g.nodes, atol=1e-14)
    r = response_function(PotentialSpec.constant(1.0), 2.0, 1 / 400)
    t = Grid1D(0.0, 2.0, 11)
    assert np.max(np.abs(krein_Phi(r, t).values - bessel_Phi(t.nodes))) < 5e-6
    # two quadratures of the closed form agree
    from scipy.integrate import quad
    from conftest import bessel_r
    ref = bessel_Phi([1.3])[0]
    alt = quad(lambda s: float(bessel_r(s)), 0, 1.3, limit=200, epsabs=1e-14)[0]
    assert abs(ref - alt) < 1e-8
