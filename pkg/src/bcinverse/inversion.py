"""Potential recovery from the response function through Krein equations."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import connecting_kernel
from .errors import AllTracesVanish, InvalidGrid, SingularSystem
from .numerics import Grid1D, SampledFunction, sine_kernel, solve_fredholm2

__all__ = [
    "KreinSolveResult",
    "ReconstructionResult",
    "krein_solve",
    "boundary_trace_curve",
    "recover_potential",
    "default_threads",
]

DEFAULT_LAMBDAS = (0.0, 1.0, 4.0)
TRACE_FLOOR = 1e-6


def default_threads():
    env = os.environ.get("BCINVERSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class KreinSolveResult:
    T: float
    lam: float
    control: SampledFunction
    trace: float
    residual: float


@dataclass(frozen=True)
class ReconstructionResult:
    """Recovered q on ``x``; the two end nodes on each side are dropped by the
    differentiation stencil (``dropped`` records how many)."""

    x: np.ndarray
    q: np.ndarray
    lambda_used: np.ndarray
    conditioning: np.ndarray
    traces: np.ndarray
    lambdas: tuple
    dropped: int = 2

    @property
    def q_recovered(self):
        return SampledFunction(Grid1D(float(self.x[0]), float(self.x[-1]), self.x.size), self.q)


def _trace(f):
    # the quadratic through nodes 0, h, 2h takes the nodal value at t = 0
    return float(f[0])


def krein_solve(cT, lam):
    """Solve (I + c^T) f = s(lam, T - t) and read y(T, lam) = f(0+)."""
    t = cT.grid.nodes
    rhs = sine_kernel(lam, cT.T - t)
    sol = solve_fredholm2(cT.kernel, rhs)
    f = sol.values
    return KreinSolveResult(cT.T, float(lam), SampledFunction(cT.grid, f), _trace(f),
                            sol.residual)


def _traces_at(r, T, lams):
    cT = connecting_kernel(r, T)
    t = cT.grid.nodes
    rhs = np.stack([sine_kernel(lam, T - t) for lam in lams], axis=1)
    try:
        sol = solve_fredholm2(cT.kernel, rhs)
    except SingularSystem as exc:
        raise SingularSystem(f"Krein system singular at T = {T}: {exc}") from exc
    f = sol.values
    return f[0]


def _as_tgrid(Tgrid):
    if isinstance(Tgrid, Grid1D):
        return Tgrid.nodes
    T = np.asarray(Tgrid, dtype=float)
    if T.ndim != 1 or T.size < 1 or np.any(T <= 0):
        raise InvalidGrid("horizons must be a positive 1-D array")
    return T


def _trace_table(r, Ts, lams, threads):
    threads = default_threads() if threads is None else max(1, int(threads))
    # larger systems first so the pool stays balanced
    order = np.argsort(-Ts)
    out = np.empty((Ts.size, len(lams)))
    if threads == 1:
        for i in order:
            out[i] = _traces_at(r, Ts[i], lams)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = {i: pool.submit(_traces_at, r, Ts[i], lams) for i in order}
        for i, fut in futs.items():
            out[i] = fut.result()
    return out


def boundary_trace_curve(r, lam, Tgrid, threads=None):
    """y(T, lam) for every T in ``Tgrid`` by independent Krein solves."""
    Ts = _as_tgrid(Tgrid)
    y = _trace_table(r, Ts, (float(lam),), threads)[:, 0]
    if isinstance(Tgrid, Grid1D):
        return SampledFunction(Tgrid, y)
    return SampledFunction(Grid1D(float(Ts[0]), float(Ts[-1]), Ts.size), y)


# 5-point least-squares parabola, second derivative at the centre
_SG2 = np.array([2.0, -1.0, -2.0, -1.0, 2.0]) / 7.0


def recover_potential(r, Tgrid, lambdas=DEFAULT_LAMBDAS, threads=None):
    """q(T) = lam + y''(T, lam)/y(T, lam) with lam picked per node by max |y|."""
    Ts = _as_tgrid(Tgrid)
    if Ts.size < 5:
        raise InvalidGrid("recovery needs at least 5 horizons")
    dT = np.diff(Ts)
    if np.any(np.abs(dT - dT[0]) > 1e-9 * Ts[-1]):
        raise InvalidGrid("horizons must be uniformly spaced")
    lams = tuple(sorted(float(v) for v in lambdas))
    if not lams:
        raise ValueError("lambda set must be nonempty")
    Y = _trace_table(r, Ts, lams, threads)
    H = dT[0]
    inner = slice(2, Ts.size - 2)
    ay = np.abs(Y[inner])
    best = np.argmax(ay, axis=1)  # first maximum is the smallest lambda
    vanish = ay[np.arange(best.size), best] < TRACE_FLOOR
    if np.any(vanish):
        node = int(np.argmax(vanish)) + 2
        raise AllTracesVanish(f"|y(T, lambda)| < {TRACE_FLOOR} for all lambda at "
                              f"node {node} (T = {Ts[node]})", node_index=node)
    d2 = np.stack([np.convolve(Y[:, k], _SG2[::-1], mode="valid") / H**2
                   for k in range(len(lams))], axis=1)
    idx = np.arange(best.size)
    y = Y[inner][idx, best]
    ypp = d2[idx, best]
    lam_used = np.asarray(lams)[best]
    q = lam_used + ypp / y
    cond = H**2 * np.abs(ypp) / np.abs(y)
    return ReconstructionResult(Ts[inner].copy(), q, lam_used, cond, Y, lams)
