"""Boundary-controlled wave equation: Goursat kernel, response function,
control, response and connecting operators."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (DomainMismatch, HorizonTooShort, InvalidControl, InvalidGrid,
                     NonFiniteValues)
from .numerics import Grid1D, KernelMatrix, SampledFunction, cumulative_integral

__all__ = [
    "GoursatKernel",
    "ResponseFunction",
    "ConnectingKernel",
    "solve_goursat",
    "response_from_kernel",
    "response_function",
    "apply_response",
    "apply_control",
    "apply_control_adjoint",
    "control_matrix",
    "connecting_kernel",
]


def _steps(T, h):
    if not (T > 0 and np.isfinite(T)):
        raise InvalidGrid(f"horizon must be positive, got {T}")
    if not h > 0:
        raise InvalidGrid(f"step must be positive, got {h}")
    n = int(round(T / h))
    if n < 1 or abs(n * h - T) > 1e-9 * T:
        raise InvalidGrid(f"step {h} does not divide T = {T}")
    return n


@dataclass(frozen=True)
class GoursatKernel:
    """w(x_i, s_j) on 0 <= x_i <= s_j <= T (upper triangle of ``values``)."""

    T: float
    h: float
    values: np.ndarray
    q0: float
    potential_digest: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0] - 1

    @property
    def grid(self):
        return Grid1D(0.0, self.T, self.n + 1)

    def diagonal(self):
        return np.diag(self.values).copy()


@dataclass(frozen=True)
class ResponseFunction:
    """Samples of r(t) on [0, horizon]. ``oscillatory`` marks spectral sums."""

    samples: SampledFunction
    oscillatory: bool = False

    @classmethod
    def from_values(cls, horizon, values, oscillatory=False):
        values = np.asarray(values, dtype=float)
        return cls(SampledFunction(Grid1D(0.0, horizon, values.size), values), oscillatory)

    @property
    def grid(self):
        return self.samples.grid

    @property
    def values(self):
        return self.samples.values

    @property
    def horizon(self):
        return self.grid.stop

    @property
    def step(self):
        return self.grid.step

    def Phi(self):
        """Running integral of r on the native grid."""
        return cumulative_integral(self.values, self.step)


@dataclass(frozen=True)
class ConnectingKernel:
    T: float
    kernel: KernelMatrix

    @property
    def grid(self):
        return self.kernel.t_grid

    @property
    def entries(self):
        return self.kernel.entries


def _march_data(q, n, h, diag_node=None, diag_half=None):
    x = h * np.arange(n + 1)
    q_node = np.asarray(q(x), dtype=float)
    q_half = np.asarray(q(x + 0.5 * h), dtype=float)
    if not (np.all(np.isfinite(q_node)) and np.all(np.isfinite(q_half))):
        raise NonFiniteValues("potential samples must be finite")
    if diag_node is None:
        Q = q.antiderivative((n + 1) * h, 0.5 * h)
        diag_node = -0.5 * Q[0:2 * n + 1:2]
        diag_half = -0.5 * Q[1:2 * n + 2:2]
    return (q_node, q_half, np.ascontiguousarray(diag_node, dtype=float),
            np.ascontiguousarray(diag_half, dtype=float))


def solve_goursat(q, T, h, diag_node=None, diag_half=None):
    """Goursat kernel for w_ss - w_xx + q w = 0, w(x, x) = -Q(x)/2, w(0, s) = 0.

    ``diag_node``/``diag_half`` override the diagonal data (values at x = i h
    and x = (i + 1/2) h); used by the acoustic solver.
    """
    n = _steps(T, h)
    q_node, q_half, diag_node, diag_half = _march_data(q, n, h, diag_node, diag_half)
    w = kernels.goursat_march(q_node, q_half, diag_node, diag_half, h, n)
    digest = q.digest() if hasattr(q, "digest") else ""
    return GoursatKernel(float(T), float(h), w, float(q_node[0]), digest)


def response_from_kernel(w):
    """r(t) = w_x(0, t) by a one-sided second-order difference."""
    n, h = w.n, w.h
    if n < 3:
        raise InvalidGrid("need at least 3 steps to extract the response")
    v = w.values
    return ResponseFunction.from_values(w.T, _response_rows(v[1], v[2], w.q0, h))


def _response_rows(row1, row2, q0, h):
    n = row1.size - 1
    r = np.empty(n + 1)
    r[2:] = (4 * row1[2:] - row2[2:]) / (2 * h)
    r[0] = -0.5 * q0
    # node 1 has no second interior point; quadratic through r0, r2, r3
    r[1] = r[0] / 3 + r[2] - r[3] / 3
    return r


def response_function(q, horizon, h):
    """r on [0, horizon] straight from a potential.

    Only the two kernel rows next to x = 0 are kept, so long horizons cost
    O(n) memory.
    """
    n = _steps(horizon, h)
    if n < 3:
        raise InvalidGrid("need at least 3 steps to extract the response")
    q_node, q_half, d_node, d_half = _march_data(q, n, h)
    row1, row2 = kernels.goursat_rows(q_node, q_half, d_node, d_half, h, n)
    return ResponseFunction.from_values(float(horizon), _response_rows(row1, row2, q_node[0], h))


def _check_control(f):
    v = np.asarray(f.values, dtype=float)
    h = f.grid.step
    scale = max(1.0, np.max(np.abs(v)))
    d0 = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h) if v.size >= 3 else 0.0
    # the one-sided estimate of f'(0) carries an O(h^2 f''') truncation error
    slack = np.max(np.abs(np.diff(v, 2))) if v.size >= 4 else 0.0
    if abs(v[0]) > 1e-8 * scale or abs(d0) > 1e-8 * scale + slack:
        raise InvalidControl("controls must satisfy f(0) = f'(0) = 0")


def apply_response(r, f):
    """(R f)(t) = -f'(t) + int_0^t r(s) f(t - s) ds on f's grid."""
    g = f.grid
    if g.start != 0.0:
        raise DomainMismatch("controls live on [0, T]")
    if r.horizon < g.stop - 1e-12 * g.stop:
        raise DomainMismatch(f"response horizon {r.horizon} < control horizon {g.stop}")
    _check_control(f)
    h = g.step
    t = g.nodes
    if abs(r.step - h) <= 1e-12 * h:
        rv = r.values[:g.count]
    else:
        rv = r.samples(t)
    fv = np.asarray(f.values, dtype=float)
    df = np.gradient(fv, h, edge_order=2)
    full = np.convolve(rv, fv)[:g.count]
    conv = h * (full - 0.5 * rv[0] * fv - 0.5 * rv * fv[0])
    return SampledFunction(g, -df + conv)


def control_matrix(w):
    """Matrix A with (W f)(x_i) = sum_j A[i, j] f(t_j) on the shared grid."""
    n, h = w.n, w.h
    K = w.values * h
    K[:, n] *= 0.5
    K[np.diag_indices(n + 1)] *= 0.5
    K[n, :] = 0.0
    # f(T - tau_j) = f(t_{n-j}): reversing columns maps tau to t
    return np.eye(n + 1)[::-1] + K[:, ::-1]


def _match(w, f):
    g = f.grid
    if g.count != w.n + 1 or abs(g.stop - w.T) > 1e-12 * w.T or g.start != 0.0:
        raise DomainMismatch("function grid does not match the kernel grid")


def apply_control(w, f):
    """u^f(x, T) = f(T - x) + int_x^T w(x, tau) f(T - tau) dtau."""
    _match(w, f)
    return SampledFunction(f.grid, control_matrix(w) @ np.asarray(f.values))


def apply_control_adjoint(w, y):
    """(W* y)(t) = y(T - t) + int_0^{T-t} w(x, T - t) y(x) dx (L2 adjoint)."""
    _match(w, y)
    n, h = w.n, w.h
    yv = np.asarray(y.values)
    K = w.values * yv[:, None]
    # column j integrates over x in [0, s_j] with trapezoid weights
    col = h * (K.sum(axis=0) - 0.5 * K[0, :] - 0.5 * np.diag(K))
    col[0] = 0.0
    out = yv[::-1] + col[::-1]
    return SampledFunction(y.grid, out)


def connecting_kernel(r, T):
    """c^T(t, s) = p(2T - t - s) - p(|t - s|), p(x) = (1/2) int_0^x r."""
    h = r.step
    n = _steps(T, h)
    if r.horizon < 2 * T - 1e-9 * T:
        raise HorizonTooShort(f"response covers [0, {r.horizon}], need [0, {2 * T}]")
    p = 0.5 * cumulative_integral(r.values[:2 * n + 1], h)
    i = np.arange(n + 1)
    c = p[2 * n - i[:, None] - i[None, :]] - p[np.abs(i[:, None] - i[None, :])]
    g = Grid1D(0.0, float(T), n + 1)
    return ConnectingKernel(float(T), KernelMatrix(g, g, c, symmetric=True))
