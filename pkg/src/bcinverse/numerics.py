"""Grids, sampled functions, the entire sine kernel, quadrature and a dense
second-kind Fredholm solver."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from .errors import DomainMismatch, InvalidGrid, NonFiniteValues, SingularSystem

__all__ = [
    "Grid1D",
    "SampledFunction",
    "KernelMatrix",
    "sine_kernel",
    "versine_kernel",
    "quadrature_weights",
    "integrate",
    "cumulative_integral",
    "exp_product_weights",
    "solve_fredholm2",
    "bump",
]


@dataclass(frozen=True)
class Grid1D:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise InvalidGrid("grid bounds must be finite")
        if int(self.count) != self.count or self.count < 2:
            raise InvalidGrid(f"grid needs at least 2 nodes, got {self.count}")
        if not self.stop > self.start:
            raise InvalidGrid(f"stop ({self.stop}) must exceed start ({self.start})")
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def from_step(cls, start, stop, h):
        """Grid with step ``h``; ``h`` must divide ``stop - start``."""
        n = (stop - start) / h
        m = int(round(n))
        if m < 1 or abs(n - m) > 1e-9 * max(1.0, n):
            raise InvalidGrid(f"step {h} does not divide [{start}, {stop}]")
        return cls(start, stop, m + 1)

    @property
    def step(self):
        return (self.stop - self.start) / (self.count - 1)

    @property
    def nodes(self):
        return self.start + self.step * np.arange(self.count)

    def __len__(self):
        return self.count


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.shape[0] != self.grid.count:
            raise DomainMismatch(
                f"{v.shape} values for a grid of {self.grid.count} nodes")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValues("sampled values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def nodes(self):
        return self.grid.nodes

    def __call__(self, x):
        """Piecewise-linear evaluation (real and imaginary parts separately)."""
        x = np.asarray(x, dtype=float)
        t = self.grid.nodes
        if np.iscomplexobj(self.values):
            return (np.interp(x, t, self.values.real)
                    + 1j * np.interp(x, t, self.values.imag))
        return np.interp(x, t, self.values)


@dataclass(frozen=True)
class KernelMatrix:
    t_grid: Grid1D
    s_grid: Grid1D
    entries: np.ndarray
    symmetric: bool = field(default=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.t_grid.count, self.s_grid.count):
            raise DomainMismatch(
                f"kernel shape {e.shape} does not match grids "
                f"({self.t_grid.count}, {self.s_grid.count})")
        if self.symmetric:
            if self.t_grid != self.s_grid:
                raise DomainMismatch("a symmetric kernel needs identical grids")
            scale = max(np.max(np.abs(e)), np.finfo(float).tiny)
            if np.max(np.abs(e - e.T)) > 1e-12 * scale:
                raise DomainMismatch("kernel declared symmetric is not")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)


def sine_kernel(lam, t):
    """Entire function sin(sqrt(lam) t)/sqrt(lam), broadcasting over inputs.

    For lam < 0 this is sinh(sqrt(-lam) t)/sqrt(-lam); at lam = 0 it is t.
    """
    lam, t = np.broadcast_arrays(np.asarray(lam, float), np.asarray(t, float))
    out = np.empty(lam.shape)
    pos = lam >= 0
    w = np.sqrt(lam[pos])
    # np.sinc(x) = sin(pi x)/(pi x), exact limit at 0
    out[pos] = t[pos] * np.sinc(w * t[pos] / np.pi)
    neg = ~pos
    if np.any(neg):
        z = np.sqrt(-lam[neg]) * t[neg]
        small = np.abs(z) < 1e-4
        ratio = np.where(small, 1.0 + z * z / 6.0,
                         np.sinh(np.where(small, 1.0, z)) / np.where(small, 1.0, z))
        out[neg] = t[neg] * ratio
    return out if out.ndim else float(out)


def versine_kernel(lam, t):
    """(1 - cos(sqrt(lam) t))/lam, the antiderivative of the sine kernel in t."""
    # 1 - cos(x) = 2 sin^2(x/2); same identity with sinh for lam < 0
    half = np.asarray(sine_kernel(lam, 0.5 * np.asarray(t, float)))
    out = 2.0 * half**2
    return out if out.ndim else float(out)


def bump(u):
    """C-infinity bump on (0, 1) with peak 1 at u = 1/2."""
    v = 2 * np.asarray(u, dtype=float) - 1
    inside = np.abs(v) < 1
    out = np.zeros(v.shape)
    out[inside] = np.exp(1 - 1 / (1 - v[inside] ** 2))
    return out


def quadrature_weights(grid, rule="trapezoid"):
    n, h = grid.count, grid.step
    if rule == "trapezoid":
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        return w
    if rule == "simpson":
        if n % 2 == 0:
            raise InvalidGrid("Simpson's rule needs an odd node count")
        w = np.full(n, 2.0)
        w[1:-1:2] = 4.0
        w[0] = w[-1] = 1.0
        return w * h / 3.0
    raise ValueError(f"unknown quadrature rule {rule!r}")


def integrate(f, rule="trapezoid"):
    """Integral of a sampled function over its whole grid."""
    v = np.asarray(f.values)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValues("cannot integrate non-finite samples")
    return np.dot(quadrature_weights(f.grid, rule), v)


def cumulative_integral(values, h):
    """Running trapezoid integral starting from 0 at the first node."""
    return cumulative_trapezoid(np.asarray(values), dx=h, initial=0.0)


def _edge_factors(theta):
    """A = int_0^1 (1-u) e^{theta u} du and B = int_0^1 u e^{theta u} du."""
    theta = np.asarray(theta, dtype=complex)
    small = np.abs(theta) < 1e-2
    th = np.where(small, 1.0, theta)
    e = np.exp(th)
    a = (e - 1.0 - th) / th**2
    b = (th * e - e + 1.0) / th**2
    ts = theta
    a_s = 1 / 2 + ts / 6 + ts**2 / 24 + ts**3 / 120 + ts**4 / 720 + ts**5 / 5040
    b_s = 1 / 2 + ts / 3 + ts**2 / 8 + ts**3 / 30 + ts**4 / 144 + ts**5 / 840
    return np.where(small, a_s, a), np.where(small, b_s, b)


def exp_product_weights(grid, z):
    """Weights W[k, n] with sum_n W[k, n] f_n = int f(t) exp(z_k t) dt for f
    piecewise linear on ``grid``; the exponential is integrated exactly.

    ``z`` may be a scalar or 1-D array of real or complex rates.
    """
    z = np.atleast_1d(np.asarray(z))
    t, h = grid.nodes, grid.step
    a, b = _edge_factors(z * h)
    ez = np.exp(np.outer(z, t[:-1]))
    w = np.zeros((z.size, grid.count), dtype=complex)
    w[:, :-1] += h * ez * a[:, None]
    w[:, 1:] += h * ez * b[:, None]
    if not np.iscomplexobj(z) or np.all(np.imag(z) == 0):
        w = w.real
    return w


@dataclass(frozen=True)
class FredholmSolution:
    values: np.ndarray
    residual: float


def solve_fredholm2(kernel, rhs, weights=None, rule="trapezoid", check=True):
    """Nystrom solve of f(t) + int K(t, s) f(s) ds = g(t).

    ``kernel`` is a KernelMatrix (or square array), ``rhs`` a SampledFunction
    or array on the kernel grid. Returns a FredholmSolution with the max-norm
    residual of the discrete system relative to max|g|.
    """
    if isinstance(kernel, KernelMatrix):
        k = kernel.entries
        if weights is None:
            weights = quadrature_weights(kernel.s_grid, rule)
    else:
        k = np.asarray(kernel, dtype=float)
    g = np.asarray(rhs.values if isinstance(rhs, SampledFunction) else rhs)
    n = k.shape[0]
    if k.shape != (n, n) or g.shape[0] != n:
        raise DomainMismatch("kernel must be square and match the right-hand side")
    if weights is None:
        raise ValueError("quadrature weights are required for a bare matrix")
    weights = np.asarray(weights, dtype=float)
    a = k * weights[None, :]
    a[np.diag_indices(n)] += 1.0
    if not np.all(np.isfinite(a)):
        raise NonFiniteValues("non-finite entries in the discretized operator")
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    norm = np.linalg.norm(a, np.inf)
    if pivots.min() < 1e-13 * norm:
        raise SingularSystem(
            f"pivot {pivots.min():.3e} below 1e-13 * |A| = {1e-13 * norm:.3e}")
    f = scipy.linalg.lu_solve((lu, piv), g, check_finite=False)
    res = np.max(np.abs(a @ f - g), axis=0)
    scale = np.max(np.abs(g), axis=0)
    rel = float(np.max(res / np.where(scale > 0, scale, 1.0)))
    if check and rel > 1e-10:
        raise SingularSystem(f"Nystrom residual {rel:.3e} exceeds 1e-10")
    return FredholmSolution(f, rel)
