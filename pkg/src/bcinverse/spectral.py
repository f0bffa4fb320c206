"""Eigen-data on [0, T], regularized spectral measures and their sums."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import ConnectingKernel, ResponseFunction
from .errors import ConvergenceFailure, HorizonExceeded, MismatchedTruncation
from .numerics import Grid1D, KernelMatrix, SampledFunction, cumulative_integral, \
    sine_kernel, versine_kernel

__all__ = [
    "EigenData",
    "RegularizedSpectralMeasure",
    "dirichlet_eigendata",
    "reference_eigendata",
    "build_sigma_d",
    "with_asymptotic_tail",
    "response_from_sigma",
    "Phi_from_sigma",
    "connecting_kernel_from_sigma",
    "levitan_partial_sums",
    "krein_Phi",
]

BOUNDARY_CONDITIONS = ("dirichlet", "neumann")


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues of -phi'' + q phi = lam phi, phi(0) = 0, phi'(0) = 1, with a
    Dirichlet or Neumann condition at T; weights are 1/|phi_n|^2."""

    T: float
    bc: str
    lambdas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}")
        lam = np.array(self.lambdas, dtype=float)
        w = np.array(self.weights, dtype=float)
        if lam.shape != w.shape or lam.ndim != 1:
            raise ValueError("lambdas and weights must be matching 1-D arrays")
        if np.any(np.diff(lam) <= 0) or np.any(w <= 0):
            raise ValueError("eigenvalues must increase strictly and weights be positive")
        for a in (lam, w):
            a.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)

    @property
    def N(self):
        return self.lambdas.size


@dataclass(frozen=True)
class RegularizedSpectralMeasure:
    """Signed atoms; sign +1 for the perturbed problem and -1 for the free
    reference, both truncated at the same level."""

    lambdas: np.ndarray
    weights: np.ndarray
    signs: np.ndarray
    T: float
    tag: str = "sigma_d"
    bc: str = "dirichlet"

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        w = np.array(self.weights, dtype=float)
        sg = np.array(self.signs, dtype=int)
        if not (lam.shape == w.shape == sg.shape) or lam.ndim != 1:
            raise ValueError("atom arrays must have matching 1-D shapes")
        if not np.all(np.isin(sg, (-1, 1))):
            raise ValueError("atom signs must be +1 or -1")
        if self.tag not in ("sigma_d", "sigma_custom"):
            raise ValueError("tag must be sigma_d or sigma_custom")
        if self.tag == "sigma_d":
            if np.sum(sg > 0) != np.sum(sg < 0):
                raise MismatchedTruncation("sigma_d needs equal atom counts per sign")
            if np.any(w[sg > 0] <= 0) or np.any(np.diff(lam[sg > 0]) <= 0):
                raise ValueError("perturbed atoms need positive weights, increasing lambda")
        for a in (lam, w, sg):
            a.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "signs", sg)

    @classmethod
    def custom(cls, lambdas, weights, signs, T, bc="dirichlet"):
        return cls(lambdas, weights, signs, float(T), "sigma_custom", bc)

    @property
    def signed_weights(self):
        return self.signs * self.weights

    def net(self):
        """Atoms left after cancelling exactly matching +/- pairs."""
        keep = np.ones(self.lambdas.size, dtype=bool)
        pos = np.flatnonzero(self.signs > 0)
        neg = np.flatnonzero(self.signs < 0)
        used = set()
        for i in pos:
            for j in neg:
                if j in used:
                    continue
                if (np.isclose(self.lambdas[i], self.lambdas[j], rtol=1e-14, atol=0)
                        and np.isclose(self.weights[i], self.weights[j], rtol=1e-14, atol=0)):
                    keep[i] = keep[j] = False
                    used.add(j)
                    break
        return RegularizedSpectralMeasure.custom(
            self.lambdas[keep], self.weights[keep], self.signs[keep], self.T, self.bc)

    def head(self, n):
        """First ``n`` atoms of each sign (in order of storage)."""
        pos = np.flatnonzero(self.signs > 0)[:n]
        neg = np.flatnonzero(self.signs < 0)[:n]
        idx = np.sort(np.concatenate([pos, neg]))
        return RegularizedSpectralMeasure.custom(
            self.lambdas[idx], self.weights[idx], self.signs[idx], self.T, self.bc)


def _targets(n, bc):
    return (n - 0.5) * np.pi if bc == "neumann" else n * np.pi


def _solve_cells(q_cells, h, T, bc, N, tol=1e-14, maxiter=100):
    """All N eigenpairs of the piecewise-constant problem.

    Brackets come from min-max (shift of the free eigenvalues by the range of
    q); the lifted Prufer angle theta(T, lam) is increasing with derivative
    int phi^2 / (phi^2 + phi'^2)(T), which drives safeguarded Newton steps.
    """
    n = np.arange(1, N + 1)
    target = _targets(n, bc)
    base = (target / T) ** 2
    pad = 1e-9 * (1.0 + np.abs(base)) + 1e-9
    lo = base + q_cells.min() - pad
    hi = base + q_cells.max() + pad
    flo = kernels.prufer_sweep(q_cells, h, lo)[0] - target
    fhi = kernels.prufer_sweep(q_cells, h, hi)[0] - target
    if np.any(flo > 0) or np.any(fhi < 0):
        raise ConvergenceFailure("eigenvalue bracket does not enclose a root")
    lam = 0.5 * (lo + hi)
    norm2 = np.empty(N)
    active = np.arange(N)
    for _ in range(maxiter):
        theta, nrm, y, dy = kernels.prufer_sweep(q_cells, h, lam[active])
        norm2[active] = nrm
        f = theta - target[active]
        below = f < 0
        lo[active] = np.where(below, lam[active], lo[active])
        hi[active] = np.where(below, hi[active], lam[active])
        slope = nrm / (y * y + dy * dy)
        step = np.where(slope > 0, f / np.where(slope > 0, slope, 1.0), np.inf)
        new = lam[active] - step
        a, b = lo[active], hi[active]
        bad = ~((new > a) & (new < b))
        new = np.where(bad, 0.5 * (a + b), new)
        done = (np.abs(new - lam[active]) <= tol * np.maximum(1.0, np.abs(lam[active]))) | (f == 0)
        done |= (b - a) <= tol * np.maximum(1.0, np.abs(lam[active]))
        lam[active] = np.where(f == 0, lam[active], new)
        active = active[~done]
        if active.size == 0:
            break
    else:
        raise ConvergenceFailure(f"{active.size} eigenvalues did not converge")
    # weights at the final iterate
    norm2 = kernels.prufer_sweep(q_cells, h, lam)[1]
    return lam, 1.0 / norm2


def dirichlet_eigendata(q, T, bc="dirichlet", N=10, cells=None):
    """First N eigenpairs on [0, T] with phi(0) = 0 and the chosen condition at T.

    The potential is replaced by cell-midpoint constants (exact transfer in each
    cell) at two resolutions and the results are Richardson-extrapolated.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}")
    if not T > 0:
        raise ValueError("T must be positive")
    M = int(cells) if cells else max(200, int(np.ceil(400 * T)))
    if not np.any(q(T / (2 * M) * (np.arange(2 * M) + 0.5))):
        # q vanishes on every cell: the free closed form is exact
        return reference_eigendata(T, bc, N)
    results = []
    for m in (M, 2 * M):
        h = T / m
        qc = np.asarray(q(h * (np.arange(m) + 0.5)), dtype=float)
        results.append(_solve_cells(qc, h, T, bc, N))
    (l1, w1), (l2, w2) = results
    lam = (4 * l2 - l1) / 3
    w = (4 * w2 - w1) / 3
    return EigenData(float(T), bc, lam, w)


def reference_eigendata(T, bc="dirichlet", N=10):
    """Free problem: lam_n = (n pi/T)^2 (or ((n - 1/2) pi/T)^2), weight 2 lam_n/T."""
    lam = (_targets(np.arange(1, N + 1), bc) / T) ** 2
    return EigenData(float(T), bc, lam, 2 * lam / T)


def build_sigma_d(perturbed, reference):
    if (perturbed.N != reference.N or perturbed.bc != reference.bc
            or abs(perturbed.T - reference.T) > 1e-12 * perturbed.T):
        raise MismatchedTruncation("perturbed and reference data must share T, bc and N")
    N = perturbed.N
    lam = np.empty(2 * N)
    w = np.empty(2 * N)
    sg = np.empty(2 * N, dtype=int)
    lam[0::2], lam[1::2] = perturbed.lambdas, reference.lambdas
    w[0::2], w[1::2] = perturbed.weights, reference.weights
    sg[0::2], sg[1::2] = 1, -1
    return RegularizedSpectralMeasure(lam, w, sg, perturbed.T, "sigma_d", perturbed.bc)


def with_asymptotic_tail(sigma, factor=20, fit=10):
    """sigma_d plus modelled atom pairs for levels N+1 .. factor*N.

    High eigenvalues behave like the free ones shifted by the mean of q over
    [0, T] with free weights; the shift is read off the last ``fit`` pairs.
    Truncation error of the integrated sums drops from O(1/N) to O(1/N^2)
    plus the tail beyond ``factor * N``.
    """
    if sigma.tag != "sigma_d":
        raise ValueError("the tail model needs a sigma_d measure")
    lp = sigma.lambdas[sigma.signs > 0]
    lm = sigma.lambdas[sigma.signs < 0]
    N = lp.size
    shift = float(np.mean(lp[-fit:] - lm[-fit:]))
    n = np.arange(N + 1, factor * N + 1)
    l0 = (_targets(n, sigma.bc) / sigma.T) ** 2
    w0 = 2 * l0 / sigma.T
    lam = np.concatenate([sigma.lambdas, l0 + shift, l0])
    w = np.concatenate([sigma.weights, w0, w0])
    sg = np.concatenate([sigma.signs, np.ones(n.size, int), -np.ones(n.size, int)])
    return RegularizedSpectralMeasure.custom(lam, w, sg, sigma.T, sigma.bc)


def _check_horizon(sigma, t_max):
    if t_max > 2 * sigma.T * (1 + 1e-12):
        raise HorizonExceeded(f"t = {t_max} beyond 2T = {2 * sigma.T}")


def _atom_sum(sigma, t, kernel, chunk=512):
    out = np.zeros_like(t, dtype=float)
    sw = sigma.signed_weights
    for i in range(0, sw.size, chunk):
        sl = slice(i, i + chunk)
        out += sw[sl] @ kernel(sigma.lambdas[sl][:, None], t[None, :])
    return out


def response_from_sigma(sigma, t_grid):
    """r(t) = sum sign * weight * s(lam, t); oscillatory under truncation."""
    _check_horizon(sigma, t_grid.stop)
    r = _atom_sum(sigma, t_grid.nodes, sine_kernel)
    return ResponseFunction(SampledFunction(t_grid, r), oscillatory=True)


def Phi_from_sigma(sigma, t_grid):
    """Phi(t) = int_0^t r, summed atom by atom in closed form."""
    _check_horizon(sigma, t_grid.stop)
    return SampledFunction(t_grid, _atom_sum(sigma, t_grid.nodes, versine_kernel))


def connecting_kernel_from_sigma(sigma, T, grid=None):
    """c^T(t, s) = sum sign * weight * s(lam, T - t) s(lam, T - s)."""
    if T > sigma.T * (1 + 1e-12):
        raise HorizonExceeded(f"T = {T} beyond the truncation length {sigma.T}")
    grid = grid or Grid1D(0.0, float(T), 201)
    tau = T - grid.nodes
    sw = sigma.signed_weights
    c = np.zeros((grid.count, grid.count))
    for i in range(0, sw.size, 4096):
        S = sine_kernel(sigma.lambdas[i:i + 4096, None], tau[None, :])
        c += S.T @ (sw[i:i + 4096, None] * S)
    c = 0.5 * (c + c.T)
    return ConnectingKernel(float(T), KernelMatrix(grid, grid, c, symmetric=True))


def levitan_partial_sums(sigma, t, s, levels):
    """Psi_n(t, s) = sum over the first n atoms of each sign of
    sign * weight * s(lam, T - t) s(lam, T - s), for every n in ``levels``."""
    levels = [int(n) for n in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must increase")
    out = []
    for n in levels:
        part = sigma.head(n)
        T = sigma.T
        term = (part.signed_weights * sine_kernel(part.lambdas, T - t)
                * sine_kernel(part.lambdas, T - s))
        out.append(float(np.sum(term)))
    return out


def krein_Phi(r, t_grid=None):
    """Phi(t) = int_0^t r on r's grid, or interpolated onto ``t_grid``."""
    Phi = cumulative_integral(r.values, r.step)
    if t_grid is None:
        return SampledFunction(r.grid, Phi)
    if t_grid.stop > r.horizon * (1 + 1e-12) or t_grid.start < r.grid.start:
        raise HorizonExceeded("t grid outside the response horizon")
    return SampledFunction(t_grid, np.interp(t_grid.nodes, r.grid.nodes, Phi))
