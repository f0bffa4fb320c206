"""Weyl function on the negative axis from the response function, and the
A-amplitude."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidGrid, TailNotNegligible, UnsupportedPreset
from .numerics import Grid1D, SampledFunction, exp_product_weights

__all__ = [
    "WeylSamples",
    "TAIL_TOLERANCE",
    "weyl_from_response",
    "weyl_from_amplitude",
    "a_amplitude",
    "weyl_reference",
    "tail_threshold",
]

TAIL_TOLERANCE = 1e-8
TAIL_MODES = ("strict", "report")
_CHUNK = 128


@dataclass(frozen=True)
class WeylSamples:
    """m(-k^2) on ``k``. ``error`` is the per-sample truncated-tail bound and
    ``k_min`` the smallest k meeting TAIL_TOLERANCE for the source data
    (0 for closed forms)."""

    k: np.ndarray
    values: np.ndarray
    error: np.ndarray
    k_min: float = 0.0

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        v = np.array(self.values, dtype=float)
        e = np.array(self.error, dtype=float)
        if k.ndim != 1 or v.shape != k.shape or e.shape != k.shape:
            raise InvalidGrid("k, values and error must be matching 1-D arrays")
        if np.any(k <= 0):
            raise InvalidGrid("Weyl samples need k > 0")
        if not np.all(np.isfinite(v)):
            raise ValueError("Weyl samples must be finite")
        for a in (k, v, e):
            a.flags.writeable = False
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "error", e)


def _k_array(k_grid):
    k = k_grid.nodes if isinstance(k_grid, Grid1D) else np.atleast_1d(np.asarray(k_grid, float))
    if k.ndim != 1 or k.size == 0 or np.any(k <= 0):
        raise InvalidGrid("k samples must be positive")
    return k


def _tail_bound(k, horizon, sup):
    return np.exp(-k * horizon) * sup / k


def tail_threshold(horizon, sup, tol=TAIL_TOLERANCE):
    """Smallest k with exp(-k H) sup / k <= tol."""
    if sup <= 0:
        return 0.0
    g = lambda k: -k * horizon + np.log(sup / k) - np.log(tol)  # noqa: E731
    lo, hi = 1e-12, 1.0
    if g(lo) <= 0:
        return lo
    while g(hi) > 0:
        hi *= 2
    return brentq(g, lo, hi, xtol=1e-12)


def _laplace(samples, rate):
    """int_0^H f(t) exp(-rate t) dt, exponential integrated exactly against the
    piecewise-linear interpolant of f."""
    out = np.empty(rate.size)
    for i in range(0, rate.size, _CHUNK):
        w = exp_product_weights(samples.grid, -rate[i:i + _CHUNK])
        out[i:i + _CHUNK] = w @ samples.values
    return out


def _check_tail(k, err, mode):
    if mode not in TAIL_MODES:
        raise ValueError(f"tail mode must be one of {TAIL_MODES}")
    bad = err > TAIL_TOLERANCE
    if mode == "strict" and np.any(bad):
        raise TailNotNegligible(f"truncated tail exceeds {TAIL_TOLERANCE} for k = "
                                f"{k[bad][:5].tolist()}")


def weyl_from_response(r, k_grid, tail_mode="strict"):
    """m(-k^2) = -k + int_0^H exp(-k t) r(t) dt with a checked tail bound."""
    k = _k_array(k_grid)
    H = r.horizon
    sup = float(np.max(np.abs(r.values)))
    err = _tail_bound(k, H, sup)
    _check_tail(k, err, tail_mode)
    m = -k + _laplace(r.samples, k)
    return WeylSamples(k, m, err, tail_threshold(H, sup))


def a_amplitude(r):
    """A(t) = -2 r(2t) on [0, H/2]; node j of A is node j of r."""
    g = r.grid
    return SampledFunction(Grid1D(0.0, g.stop / 2, g.count), -2.0 * np.asarray(r.values))


def weyl_from_amplitude(A, k_grid, tail_mode="strict"):
    """m(-k^2) = -k - int_0^{H/2} A(t) exp(-2 k t) dt."""
    k = _k_array(k_grid)
    half = A.grid.stop
    sup = 0.5 * float(np.max(np.abs(A.values)))
    err = _tail_bound(k, 2 * half, sup)
    _check_tail(k, err, tail_mode)
    m = -k - _laplace(A, 2 * k)
    return WeylSamples(k, m, err, tail_threshold(2 * half, sup))


def weyl_reference(q, k_grid):
    """Closed forms: -k for q = 0, -sqrt(k^2 + c) for q = c on the half-line."""
    k = _k_array(k_grid)
    if q.variant == "zero":
        m = -k
    elif q.variant == "constant" and not np.isfinite(q.support):
        with np.errstate(invalid="ignore"):
            m = -np.sqrt(k * k + q.params["c"])
    else:
        raise UnsupportedPreset(f"no closed-form Weyl function for {q.variant!r} "
                                f"with support {q.support}")
    if not np.all(np.isfinite(m)):
        raise UnsupportedPreset("k^2 + c must be positive")
    return WeylSamples(k, m, np.zeros_like(k))
