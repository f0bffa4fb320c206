"""Acoustic scattering on the half-line with a Dirichlet wall at x = 0.

A delta wave delta(t + x) comes in from +infinity and hits the wall at t = 0.
Beyond the support a of q the outgoing field has two parts:

* arrivals ahead of the wall echo, p(x - t) with s = x - t in [0, 2a]
  (the response read on times t < x);
* the wall echo -delta(t - x) and the wave behind it, a function of the
  delay tau = t - x >= 0.

Both are produced by characteristic marches of the fundamental solution
u = delta(t + x) + w(x, t): region I (between the incoming front and the
wall echo) and region II (behind the echo).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from . import kernels
from .dynamics import solve_goursat
from .errors import (CFLViolation, InsufficientDecay, KernelUnavailable, PhaseNotDecayed,
                     SupportViolation, TruncationTooShort, UnboundedSupport)
from .numerics import (Grid1D, SampledFunction, bump, exp_product_weights,
                       quadrature_weights, solve_fredholm2)

__all__ = [
    "AcousticResponse",
    "simulate_acoustic_response",
    "scattering_matrix_from_p",
    "phase_integrand",
    "p_from_phase",
    "acoustic_connecting_check",
    "acoustic_krein_solve",
    "apply_acoustic_control",
    "apply_acoustic_control_adjoint",
    "pulse_reflection",
    "convolve_with_pulse",
]

DECAY_RATIO = 1e-4
PHASE_TOLERANCE = 1e-3
COEFFICIENTS = ("C", "C2", "mass", "none")


@dataclass(frozen=True)
class AcousticResponse:
    """Regular part of p(s) on [0, s_max] plus the delta coefficient.

    ``echo`` holds the wave behind the wall echo as a function of the delay
    tau = t - x (None for data that only carry p). ``kernel`` is the region I
    lattice W[P, m] of w on xi = t + x = P h, zeta = t - x = (m - M) h,
    needed by the control operator.
    """

    samples: SampledFunction
    delta_coefficient: float = -1.0
    echo: SampledFunction = None
    support: float = 0.0
    kernel: np.ndarray = None
    note: str = ""

    @property
    def grid(self):
        return self.samples.grid

    @property
    def values(self):
        return self.samples.values

    @property
    def step(self):
        return self.grid.step

    def p_at(self, s):
        """p_reg at s >= 0 (zero past the sampled range)."""
        s = np.asarray(s, dtype=float)
        inside = s <= self.grid.stop + 1e-12 * self.grid.stop
        return np.where(inside, self.samples(np.minimum(s, self.grid.stop)), 0.0)


def _support(q):
    if q.variant == "zero":
        return 0.0
    a = q.support
    if not math.isfinite(a):
        raise UnboundedSupport("acoustic scattering needs a compactly supported potential")
    return float(a)


def _region_one(q, h, M, Q):
    """w between the incoming front (xi = 0) and the wall echo (zeta = 0)."""
    k = np.arange(2 * M + 2)
    q_half = np.asarray(q(0.5 * h * k), dtype=float)
    Qa = Q[M]
    # front t = -x: w = -(1/2) int_x^a q, x = (M - m) h / 2
    front = -0.5 * (Qa - Q[M - np.arange(M + 1)])
    return kernels.char_rect_march(q_half, front, h, M, M)


def simulate_acoustic_response(q, t_max, h, store_kernel=True):
    """p_reg on [0, 2a], the wave behind the echo on [0, t_max], delta part -1."""
    a = _support(q)
    if not (t_max > 0 and h > 0):
        raise ValueError("t_max and h must be positive")
    # support rounded up to the lattice so that 2a / h is even
    half = int(math.ceil(a / h - 1e-9))
    a_eff = half * h
    M = 2 * half
    n = half + int(math.ceil(t_max / h - 1e-9))
    Q = q.antiderivative((n + 1) * h, 0.5 * h) if M else np.zeros(2 * n + 3)
    if M:
        W = _region_one(q, h, M, Q)
        pre = W[M, ::-1].copy()
        on_echo = W[:, M]
    else:
        W = np.zeros((1, 1))
        pre = np.zeros(2)
        on_echo = np.zeros(1)
    Qa = Q[M]
    # behind the echo: the jump across t = x grows like (1/2) int_0^x q and
    # vanishes at the corner, where the wall forces w = 0
    p_idx = np.minimum(np.arange(2 * n + 2), on_echo.size - 1)
    diag = on_echo[p_idx] + 0.5 * Qa + 0.5 * Q[:2 * n + 2]
    if M:
        w = solve_goursat(q, n * h, h, diag_node=diag[0::2], diag_half=diag[1::2]).values
        echo = w[half, half:].copy()
    else:
        echo = np.zeros(n + 1)
    pre_grid = Grid1D(0.0, max(M, 1) * h, pre.size)
    echo_grid = Grid1D(0.0, (n - half) * h, echo.size)
    return AcousticResponse(SampledFunction(pre_grid, pre), -1.0,
                            SampledFunction(echo_grid, echo), a_eff,
                            W if store_kernel else None)


def scattering_matrix_from_p(p, k_grid):
    """S(k) = -[c_delta + int p(s) e^{-iks} ds + int echo(tau) e^{ik tau} dtau]."""
    k = k_grid.nodes if isinstance(k_grid, Grid1D) else np.atleast_1d(np.asarray(k_grid, float))
    parts = [np.abs(p.values)]
    if p.echo is not None:
        e = np.abs(p.echo.values)
        parts.append(e)
        peak = max(float(np.max(x)) for x in parts)
        tail = e[-max(2, e.size // 20):]
        if peak > 0 and np.max(tail) > DECAY_RATIO * peak:
            raise InsufficientDecay(f"echo tail {np.max(tail):.3e} exceeds "
                                    f"{DECAY_RATIO} of the peak {peak:.3e}")
    S = -p.delta_coefficient - exp_product_weights(p.grid, -1j * k) @ p.values
    if p.echo is not None:
        S = S - exp_product_weights(p.echo.grid, 1j * k) @ p.echo.values
    return np.asarray(S, dtype=complex)


def phase_integrand(k, t, eta, form="cos"):
    """cos kt - cos(kt - 2 eta) or, identically, 2 sin(eta) sin(eta - kt)."""
    k, t, eta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (k, t, eta)))
    if form == "cos":
        return np.cos(k * t) - np.cos(k * t - 2 * eta)
    if form == "sin":
        return 2 * np.sin(eta) * np.sin(eta - k * t)
    raise ValueError("form must be 'cos' or 'sin'")


def _bound_coefficient(b, which):
    return {"C": b.C, "C2": b.C**2, "mass": b.mass, "none": 0.0}[which]


def p_from_phase(data, t_grid, K_max=None, coefficient="C2", tail=True):
    """p(t) = sum_j c_j e^{-k_j t} + (1/pi) int_0^K (cos kt - cos(kt - 2 eta)) dk.

    eta = arg M. ``coefficient`` picks c_j among C_j, C_j^2 and the spectral
    mass. With ``tail`` the continuum beyond K is added from eta ~ eta_1 / k.
    """
    if coefficient not in COEFFICIENTS:
        raise ValueError(f"coefficient must be one of {COEFFICIENTS}")
    k = data.k
    eta = data.eta
    if K_max is not None:
        keep = k <= K_max * (1 + 1e-12)
        k, eta = k[keep], eta[keep]
    if abs(eta[-1]) > PHASE_TOLERANCE:
        raise PhaseNotDecayed(f"|eta(K)| = {abs(eta[-1]):.3e} > {PHASE_TOLERANCE} at K = {k[-1]}")
    kg = Grid1D(0.0, float(k[-1]), k.size + 1)
    if not np.allclose(np.diff(np.concatenate([[0.0], k])), kg.step, rtol=1e-9, atol=1e-12):
        raise ValueError("k grid must be uniform and start one step above 0")
    t = t_grid.nodes
    # integrand = Re[e^{ikt} (1 - e^{-2 i eta})], zero at k = 0
    g = np.concatenate([[0.0], 1 - np.exp(-2j * eta)])
    out = (exp_product_weights(kg, 1j * t) @ g).real / np.pi
    if tail:
        sel = k >= 0.8 * k[-1]
        eta1 = float(np.mean(eta[sel] * k[sel]))
        si, _ = sici(k[-1] * t)
        out += np.where(t > 0, -(2 * eta1 / np.pi) * (np.pi / 2 - si), 0.0)
    for b in data.bound:
        out += _bound_coefficient(b, coefficient) * np.exp(-b.k * t)
    note = f"generalized-function regularization: frequency cutoff K_max = {k[-1]:g}"
    return AcousticResponse(SampledFunction(t_grid, out), -1.0, None, data.support, None, note)


def _kernel_value(p, i, j):
    """w(x_i, -s_j) from the region I lattice (zero outside region I)."""
    W = p.kernel
    M = W.shape[1] - 1
    P = i - j
    m = M - i - j
    ok = (P >= 0) & (m >= 0)
    out = np.zeros(np.broadcast(i, j).shape)
    out[ok] = W[np.broadcast_to(P, out.shape)[ok], np.broadcast_to(m, out.shape)[ok]]
    return out


def _need_kernel(p):
    if p.kernel is None:
        raise KernelUnavailable("response was produced without the region I kernel")


def _control_part(p, nc, nx):
    """K[i, j]: (Wf)(x_i) - f(x_i) = sum_j K[i, j] f(s_j), s_j <= T_c."""
    h = p.step
    i = np.arange(nx + 1)[:, None]
    j = np.arange(nc + 1)[None, :]
    K = _kernel_value(p, i, j) * h
    upper = np.minimum(i, nc)
    K[j > upper] = 0.0
    K[(j == upper) | (j == 0)] *= 0.5
    K[0, :] = 0.0
    return K


def _steps(T, h):
    n = int(round(T / h))
    if n < 1 or abs(n * h - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"step {h} does not divide {T}")
    return n


def acoustic_connecting_check(p, T_c):
    """Both sides of C = I + R on controls over [0, T_c].

    Left: (W f, W g) over x in [0, max(T_c, 2a)] from the region I kernel,
    returned as the matrix acting on nodal values. Right: I + the Hankel
    matrix p(tau + s) with trapezoid weights. The delta part of p sits at
    tau = s = 0 only and does not enter.
    """
    _need_kernel(p)
    h = p.step
    nc = _steps(T_c, h)
    nx = max(nc, p.kernel.shape[1] - 1)
    K = _control_part(p, nc, nx)
    ws = quadrature_weights(Grid1D(0.0, nc * h, nc + 1))
    wx = quadrature_weights(Grid1D(0.0, nx * h, nx + 1))
    Ks = K[:nc + 1]
    G = np.diag(ws) + ws[:, None] * Ks + Ks.T * ws[None, :] + K.T @ (wx[:, None] * K)
    left = G / ws[:, None]
    idx = np.arange(nc + 1)
    right = np.eye(nc + 1) + p.p_at(h * (idx[:, None] + idx[None, :])) * ws[None, :]
    return left, right


def apply_acoustic_control(p, f):
    """(W f)(x) = f(x) + int_0^x w(x, -s) f(s) ds on f's grid."""
    _need_kernel(p)
    g = f.grid
    n = g.count - 1
    if abs(g.step - p.step) > 1e-12 * p.step or g.start != 0.0:
        raise ValueError("control grid must start at 0 with the response step")
    K = _control_part(p, n, n)
    return SampledFunction(g, np.asarray(f.values) + K @ np.asarray(f.values))


def apply_acoustic_control_adjoint(p, y):
    """(W* y)(s) = y(s) + int_s^inf w(x, -s) y(x) dx; y must cover x <= 2a."""
    _need_kernel(p)
    g = y.grid
    n = g.count - 1
    if abs(g.step - p.step) > 1e-12 * p.step or g.start != 0.0:
        raise ValueError("state grid must start at 0 with the response step")
    if g.stop < 2 * p.support - 1e-9:
        raise TruncationTooShort(f"state grid must reach 2a = {2 * p.support}")
    h = p.step
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    # column j integrates x over [s_j, 2a - s_j] (the kernel vanishes outside)
    K = _kernel_value(p, i, j) * h
    K[i == j] *= 0.5
    M = p.kernel.shape[1] - 1
    K[(i + j) == M] *= 0.5
    yv = np.asarray(y.values)
    return SampledFunction(g, yv + K.T @ yv)


def acoustic_krein_solve(p, k, T_c):
    """Nystrom solve of f(tau) + int_0^T_c p(tau + s) f(s) ds = e^{ik tau}."""
    h = p.step
    n = _steps(T_c, h)
    if T_c < 2 * p.support - 1e-9:
        raise TruncationTooShort(f"T_c = {T_c} < 2a = {2 * p.support}: "
                                 f"p(tau + s) is cut inside its support")
    g = Grid1D(0.0, n * h, n + 1)
    idx = np.arange(n + 1)
    P = p.p_at(h * (idx[:, None] + idx[None, :]))
    rhs = np.exp(1j * k * g.nodes)
    sol = solve_fredholm2(P, rhs, weights=quadrature_weights(g))
    return SampledFunction(g, sol.values)


def pulse_reflection(q, width, t_max, h, dt=None, margin=None):
    """Finite-difference oracle: send the bump g(t + x) (support [-width, 0])
    onto the wall and record the outgoing wave at x = L.

    Returns (tau, trace) with tau = t - L, the delay of the outgoing wave.
    Runs the unit-Courant characteristic scheme, so ``dt`` must equal h.
    """
    a = _support(q)
    dt = h if dt is None else dt
    if dt > h * (1 + 1e-12):
        raise CFLViolation(f"time step {dt} exceeds the space step {h}")
    if dt < h * (1 - 1e-12):
        raise ValueError("the scheme runs at unit Courant number; use dt = h")
    margin = 4 * h + width if margin is None else margin
    nx = int(math.ceil((a + margin) / h))
    L = nx * h
    if a >= L:
        raise SupportViolation(f"support {a} does not fit inside L = {L}")
    x = h * np.arange(nx + 1)
    q_node = np.asarray(q(x), dtype=float)
    if q_node[-1] != 0.0:
        raise SupportViolation("q must vanish at the outer boundary")
    t0 = -L - h
    nlev = int(math.ceil((t_max + L - t0) / h)) + 2
    t = t0 + h * np.arange(nlev)

    def g(s):
        return bump((s + width) / width)

    inc = g(t + L)
    u0 = g(t[0] + x)
    u1 = g(t[1] + x)
    out = kernels.wave_leapfrog(q_node, h, inc, u0, u1)
    # out[n - 1] is the outgoing wave at x = L on level n + 1
    tau = t[2:] - L
    return tau, out


def convolve_with_pulse(p, width, tau):
    """(g * P)(tau) for the full outgoing response P, with the pulse of
    ``pulse_reflection``; used to compare the two time-domain pipelines."""
    tau = np.asarray(tau, dtype=float)
    h = p.step
    m = max(64, int(math.ceil(width / h)) * 8)
    sig = np.linspace(-width, 0.0, m + 1)
    gw = bump((sig + width) / width) * quadrature_weights(Grid1D(-width, 0.0, m + 1))
    d = tau[:, None] - sig[None, :]
    P = np.zeros_like(d)
    pre = d < 0
    P[pre] = p.p_at(-d[pre])
    if p.echo is not None:
        post = (d >= 0) & (d <= p.echo.grid.stop)
        P[post] = p.echo(d[post])
    g = bump((tau + width) / width)
    return p.delta_coefficient * g + P @ gw
