"""Jost solutions, scattering matrix, bound states and the scattering form of
the response function for compactly supported potentials."""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import sici

from . import kernels
from .dynamics import ResponseFunction
from .errors import IncompleteData, SearchGridTooCoarse, UnboundedSupport, ZeroJostFunction
from .numerics import Grid1D, SampledFunction, exp_product_weights, quadrature_weights

__all__ = [
    "BoundState",
    "ScatteringData",
    "jost_solution",
    "jost_function",
    "scattering_matrix",
    "bound_states",
    "scattering_data",
    "response_from_scattering",
    "parseval_check",
    "regular_solution",
    "connection_residual",
]

MODES = ("as_printed", "measure_consistent")


def _support(q):
    a = getattr(q, "support", math.inf)
    if not math.isfinite(a):
        raise UnboundedSupport("scattering needs a potential with finite support")
    return float(a)


def _cells(q, a, cells):
    m = int(cells) if cells else max(400, int(math.ceil(200 * a)))
    h = a / m
    return np.asarray(q(h * (np.arange(m) + 0.5)), dtype=float), h


def _cp_richardson(q, a, z, y0, dy0, reverse, cells=None):
    """End state of the exact piecewise-constant transfer, extrapolated in h."""
    out = []
    for mult in (1, 2):
        m = (int(cells) if cells else max(400, int(math.ceil(200 * a)))) * mult
        qc, h = _cells(q, a, m)
        out.append(kernels.cp_propagate(qc, h, z, y0, dy0, reverse=reverse))
    (y1, d1), (y2, d2) = out
    return (4 * y2 - y1) / 3, (4 * d2 - d1) / 3


@dataclass(frozen=True)
class BoundState:
    """-k^2 is an eigenvalue; C^2 = 1/int e(ik, x)^2 dx and ``de0`` = e'(ik, 0)."""

    k: float
    C: float
    de0: float

    @property
    def mass(self):
        """Spectral mass 1/|phi|^2 of the eigenfunction with phi'(0) = 1."""
        return self.C**2 * self.de0**2


@dataclass(frozen=True)
class ScatteringData:
    k_grid: Grid1D
    M: np.ndarray
    bound: tuple = ()
    bound_searched: bool = False
    support: float = math.inf
    potential: object = field(default=None, compare=False)

    def __post_init__(self):
        m = np.array(self.M, dtype=complex)
        if m.shape != (self.k_grid.count,):
            raise ValueError("Jost samples must match the k grid")
        m.flags.writeable = False
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "bound", tuple(sorted(self.bound, key=lambda b: -b.k)))

    @property
    def k(self):
        return self.k_grid.nodes

    @property
    def S(self):
        return np.conj(self.M) / self.M

    @property
    def A(self):
        return np.abs(self.M)

    @property
    def U(self):
        return 1.0 / np.abs(self.M) ** 2

    @property
    def eta(self):
        """Continuous phase of M, fixed so that it tends to 0 at the top of the grid."""
        e = np.unwrap(np.angle(self.M))
        return e - 2 * np.pi * np.round(e[-1] / (2 * np.pi))

    @property
    def bound_states(self):
        return [(b.k, b.C) for b in self.bound]

    def with_bound_states(self, bound):
        return replace(self, bound=tuple(bound), bound_searched=True)


def jost_solution(q, k, x_grid, rtol=1e-10, atol=1e-12):
    """e(k, x) from -e'' + q e = k^2 e, e = exp(ikx) beyond the support.

    Integrated backward from x = a with an adaptive 8th-order Runge-Kutta
    method; nodes with x >= a take the exact exponential.
    """
    a = _support(q)
    k = complex(k)
    x = x_grid.nodes if isinstance(x_grid, Grid1D) else np.asarray(x_grid, float)
    if np.any(x < -1e-12):
        raise ValueError("x grid must lie in x >= 0")
    vals = np.exp(1j * k * x)
    inside = x < a
    if np.any(inside):
        ea = np.exp(1j * k * a)

        def rhs(s, y):
            return [y[1], (q(s) - k * k) * y[0]]

        xi = x[inside]
        order = np.argsort(xi)[::-1]
        sol = solve_ivp(rhs, (a, 0.0), [ea, 1j * k * ea], method="DOP853",
                        t_eval=xi[order], rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(sol.message)
        got = np.empty(xi.size, dtype=complex)
        got[order] = sol.y[0]
        vals[inside] = got
    if isinstance(x_grid, Grid1D):
        return SampledFunction(x_grid, vals)
    return vals


def jost_function(q, k, cells=None, derivative=False):
    """M(k) = e(k, 0) for an array of k (real or in the upper half plane)."""
    a = _support(q)
    k = np.atleast_1d(np.asarray(k))
    if a == 0.0:
        m, dm = np.ones_like(k, dtype=complex), 1j * k
    else:
        ea = np.exp(1j * k * a)
        m, dm = _cp_richardson(q, a, k * k, ea, 1j * k * ea, True, cells)
    return (m, dm) if derivative else m


def scattering_matrix(q, k_grid, cells=None):
    """S, eta, A, U on a grid of positive k (bound states not searched)."""
    if k_grid.start <= 0:
        raise ValueError("k grid must be strictly positive")
    a = _support(q)
    M = jost_function(q, k_grid.nodes.astype(complex), cells)
    if np.any(np.abs(M) < 1e-12):
        i = int(np.argmin(np.abs(M)))
        raise ZeroJostFunction(f"|M(k)| < 1e-12 at k = {k_grid.nodes[i]}")
    return ScatteringData(k_grid, M, (), False, a, q)


def _real_jost(q, a, kappa, cells=None):
    """e(i kappa, 0) and e'(i kappa, 0), both real, from e(a) = exp(-kappa a)."""
    kappa = np.atleast_1d(np.asarray(kappa, float))
    ea = np.exp(-kappa * a)
    return _cp_richardson(q, a, -kappa**2, ea, -kappa * ea, True, cells)


def _count_bound_below(q_cells, h, a, kappa):
    """Number of eigenvalues below -kappa^2 (kappa >= 0) by oscillation count."""
    theta, _, y, dy = kernels.prufer_sweep(q_cells, h, np.array([-kappa**2]))
    n = int(np.floor(theta[0] / np.pi + 1e-12))
    y, dy = y[0], dy[0]
    # one more zero beyond a if the exterior continuation crosses the axis
    if kappa == 0:
        n += int(y * dy < 0)
    else:
        c1, c2 = 0.5 * (y + dy / kappa), 0.5 * (y - dy / kappa)
        n += int(c1 != 0 and -c2 / c1 > 1)
    return n


def _norming(q, a, kappa, cells=None):
    """int_0^inf e(i kappa, x)^2 dx, extrapolated in h; exact exterior tail."""
    vals = []
    for mult in (1, 2):
        m = (int(cells) if cells else max(400, int(math.ceil(200 * a)))) * mult
        qc, h = _cells(q, a, m)
        ea = math.exp(-kappa * a)
        ys, dys = kernels.cp_propagate(qc, h, np.array([-kappa**2]), ea, -kappa * ea,
                                       reverse=True, store=True)
        y, dy = ys[:-1, 0], dys[:-1, 0]
        w2 = -kappa**2 - qc
        c, s = kernels.transfer_cs(w2, h)
        icc, ics, iss = kernels.cell_square_integrals(w2, h, c, s)
        vals.append(float(np.sum(y * y * icc + 2 * y * dy * ics + dy * dy * iss)))
    inner = (4 * vals[1] - vals[0]) / 3
    return inner + math.exp(-2 * kappa * a) / (2 * kappa)


def bound_states(q, kappa_max, n_grid=2000, cells=None):
    """All kappa in (0, kappa_max) with e(i kappa, 0) = 0, and norming data."""
    a = _support(q)
    if kappa_max <= 0:
        raise ValueError("kappa_max must be positive")
    if a == 0.0:
        return []
    kap = np.linspace(0.0, kappa_max, n_grid + 1)[1:]
    f, _ = _real_jost(q, a, kap, cells)
    f = f.real
    idx = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    qc, h = _cells(q, a, cells)
    expected = (_count_bound_below(qc, h, a, 0.0)
                - _count_bound_below(qc, h, a, float(kappa_max)))
    if idx.size != expected:
        raise SearchGridTooCoarse(
            f"found {idx.size} sign changes but the oscillation count gives {expected}")
    out = []
    for i in idx:
        k = brentq(lambda s: float(_real_jost(q, a, s, cells)[0].real[0]),
                   kap[i], kap[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
        de0 = float(_real_jost(q, a, k, cells)[1].real[0])
        C = 1.0 / math.sqrt(_norming(q, a, k, cells))
        out.append(BoundState(float(k), C, de0))
    return sorted(out, key=lambda b: -b.k)


def scattering_data(q, k_grid, kappa_max=None, cells=None):
    """Complete data: continuum samples plus the bound states."""
    data = scattering_matrix(q, k_grid, cells)
    if kappa_max is None:
        depth = max(0.0, -float(np.min(q(np.linspace(0, data.support, 2001)))))
        kappa_max = math.sqrt(depth) + 1.0
    return data.with_bound_states(bound_states(q, kappa_max, cells=cells))


def _tail_coefficient(k, U, frac=0.2):
    """Fit U - 1 ~ c2/k^2 + c4/k^4 over the top ``frac`` of the grid."""
    sel = k >= k[-1] * (1 - frac)
    if np.count_nonzero(sel) < 4:
        return 0.0
    A = np.stack([np.ones(sel.sum()), 1.0 / k[sel] ** 2], axis=1)
    coef, *_ = np.linalg.lstsq(A, (U[sel] - 1.0) * k[sel] ** 2, rcond=None)
    return float(coef[0])


def response_from_scattering(data, t_grid, mode="measure_consistent", tail=True):
    """r(t) = sum_j B_j(t) + (2/pi) int_0^K sin(kt) (U(k) - 1) k dk.

    ``mode`` selects the bound-state term: C_j^2 sin(k_j t)/k_j
    (``as_printed``) or C_j^2 e'(ik_j,0)^2 sinh(k_j t)/k_j
    (``measure_consistent``, the atom at -k_j^2 of the spectral measure).
    With ``tail`` the continuum beyond K is added from the fitted 1/k^2 decay
    of U - 1.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not data.bound_searched:
        raise IncompleteData("bound states have not been determined")
    t = t_grid.nodes
    k = np.concatenate([[0.0], data.k])
    U = data.U
    g = np.concatenate([[0.0], (U - 1.0) * data.k])
    kg = Grid1D(0.0, float(k[-1]), k.size)
    if not np.allclose(np.diff(k), kg.step, rtol=1e-9, atol=1e-12):
        raise ValueError("k grid must be uniform and start one step above 0")
    W = exp_product_weights(kg, 1j * t)
    r = (2 / np.pi) * (W @ g).imag
    if tail:
        c2 = _tail_coefficient(data.k, U)
        si, _ = sici(k[-1] * t)
        r += (2 / np.pi) * c2 * (np.pi / 2 - si)
    for b in data.bound:
        if mode == "as_printed":
            r += b.C**2 * np.sin(b.k * t) / b.k
        else:
            r += b.mass * np.sinh(b.k * t) / b.k
    return ResponseFunction(SampledFunction(t_grid, r), oscillatory=True)


def regular_solution(q, k, x_grid, sub=None, extrapolate=True):
    """phi(k, x) with phi(0) = 0, phi'(0) = 1 on a uniform grid starting at 0,
    for an array of k; returns shape (x.size, k.size).

    Each grid step is split into ``sub`` cells; with ``extrapolate`` a second
    pass at 2 * sub cells removes the O(h^2) term.
    """
    k = np.atleast_1d(np.asarray(k))
    if sub is None:
        sub = max(1, int(math.ceil(200 * x_grid.step)))
    z = k * k
    if np.iscomplexobj(z) and not np.any(z.imag):
        z = z.real
    res = []
    for m in ((sub, 2 * sub) if extrapolate else (sub,)):
        h = x_grid.step / m
        n = (x_grid.count - 1) * m
        qc = np.asarray(q(h * (np.arange(n) + 0.5)), dtype=float)
        ys, _ = kernels.cp_propagate(qc, h, z, 0.0, 1.0, store=True)
        res.append(ys[::m])
    if not extrapolate:
        return res[0]
    return (4 * res[1] - res[0]) / 3


def _transforms(q, k, grid, rows, extrapolate, chunk=256):
    """rows @ phi(k, x_grid) for every k, computed in chunks of k."""
    # nothing beyond the last node where some row is nonzero contributes
    last = int(np.max(np.flatnonzero(np.any(rows != 0, axis=0))))
    last = max(last, 1)
    grid = Grid1D(0.0, float(grid.nodes[last]), last + 1)
    rows = rows[:, :last + 1]
    out = np.empty((rows.shape[0], k.size), dtype=np.result_type(k, float))
    for i in range(0, k.size, chunk):
        out[:, i:i + chunk] = rows @ regular_solution(q, k[i:i + chunk], grid,
                                                      extrapolate=extrapolate)
    return out


def parseval_check(data, f, g, extrapolate=False):
    """(int f g, bound-state part + (2/pi) int F f F g U k^2 dk).

    phi(k, .) comes from the exact transfer through cell-midpoint values of
    q, one cell per grid step unless ``extrapolate`` is set.
    """
    if not data.bound_searched:
        raise IncompleteData("bound states have not been determined")
    q = data.potential
    grid = f.grid
    if grid != g.grid or grid.start != 0.0:
        raise ValueError("f and g must share a grid starting at 0")
    fv, gv = np.asarray(f.values, float), np.asarray(g.values, float)
    w = quadrature_weights(grid)
    lhs = float(np.dot(w, fv * gv))
    if not np.any(fv) or not np.any(gv):
        return lhs, 0.0
    rows = np.stack([w * fv, w * gv])
    k = data.k
    Ff, Fg = _transforms(q, k, grid, rows, extrapolate)
    kg = np.concatenate([[0.0], k])
    integrand = np.concatenate([[0.0], Ff * Fg * data.U * k**2])
    cont = (2 / np.pi) * float(np.dot(quadrature_weights(Grid1D(0.0, kg[-1], kg.size)),
                                      integrand))
    bound = 0.0
    if data.bound:
        kap = np.array([b.k for b in data.bound])
        # phi(i kappa, x) is real: z = -kappa^2
        Bf, Bg = _transforms(q, 1j * kap, grid, rows, extrapolate).real
        mass = np.array([b.mass for b in data.bound])
        bound = float(np.sum(mass * Bf * Bg))
    return lhs, cont + bound


def connection_residual(q, k, x_grid):
    """max over x of |-2ik phi(k,x)/M(k) - (e(-k,x) - S(k) e(k,x))|."""
    k = float(k)
    ep = jost_solution(q, k, x_grid).values
    em = jost_solution(q, -k, x_grid).values
    M = ep[0]
    S = np.conj(M) / M
    phi = regular_solution(q, np.array([k]), x_grid)[:, 0]
    lhs = -2j * k * phi / M
    return float(np.max(np.abs(lhs - (em - S * ep))))
