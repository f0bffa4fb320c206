# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in ``_kernels_py``; same signatures and results."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, cosh, floor, fmod, sin, sinh, sqrt, fabs, M_PI

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex ccos(double complex)
    double complex csin(double complex)

cdef extern from "math.h" nogil:
    void sincos(double, double *, double *)

cdef double SERIES_CUT = 1e-3


def transfer_cs(w2, h):
    from ._kernels_py import transfer_cs as f
    return f(w2, h)


def cell_square_integrals(w2, h, c, s):
    from ._kernels_py import cell_square_integrals as f
    return f(w2, h, c, s)


cdef inline void _real_cs(double w2, double h, double *c, double *s) nogil:
    cdef double x = w2 * h * h, om
    if fabs(x) < SERIES_CUT:
        c[0] = 1 - x / 2 + x * x / 24 - x * x * x / 720
        s[0] = h * (1 - x / 6 + x * x / 120 - x * x * x / 5040)
    elif w2 > 0:
        om = sqrt(w2)
        sincos(om * h, s, c)
        s[0] = s[0] / om
    else:
        om = sqrt(-w2)
        c[0] = cosh(om * h)
        s[0] = sinh(om * h) / om


cdef inline void _complex_cs(double complex w2, double h,
                             double complex *c, double complex *s) nogil:
    cdef double complex x = w2 * h * h, om
    if fabs(x.real) + fabs(x.imag) < SERIES_CUT:
        c[0] = 1 - x / 2 + x * x / 24 - x * x * x / 720
        s[0] = h * (1 - x / 6 + x * x / 120 - x * x * x / 5040)
    else:
        om = csqrt(w2)
        c[0] = ccos(om * h)
        s[0] = csin(om * h) / om


def goursat_march(double[::1] q_node, double[::1] q_half, double[::1] d_node,
                  double[::1] d_half, double h, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n + 1, n + 1))
    cdef double[:, ::1] w = out
    cdef double hh = h * h, g
    cdef Py_ssize_t i, j
    with nogil:
        for j in range(1, n + 1):
            w[j, j] = d_node[j]
            if j >= 2:
                i = j - 1
                g = (q_node[i - 1] * w[i - 1, i] + q_half[i] * d_half[i]
                     + q_half[i - 1] * d_half[i - 1])
                w[i, j] = ((w[i - 1, i] + d_half[i] - d_half[i - 1] - hh / 8 * g)
                           / (1 + hh * q_node[i] / 8))
            for i in range(1, j - 1):
                g = (q_node[i - 1] * w[i - 1, j - 1] + q_node[i + 1] * w[i + 1, j - 1]
                     + q_node[i] * w[i, j - 2])
                w[i, j] = ((w[i - 1, j - 1] + w[i + 1, j - 1] - w[i, j - 2] - hh / 4 * g)
                           / (1 + hh * q_node[i] / 4))
    return out


def goursat_rows(double[::1] q_node, double[::1] q_half, double[::1] d_node,
                 double[::1] d_half, double h, Py_ssize_t n):
    r1 = np.zeros(n + 1)
    r2 = np.zeros(n + 1)
    a = np.zeros(n + 1)
    b = np.zeros(n + 1)
    c = np.zeros(n + 1)
    cdef double[::1] row1 = r1, row2 = r2, prev2 = a, prev1 = b, col = c, tmp
    cdef double hh = h * h, g
    cdef Py_ssize_t i, j
    with nogil:
        for j in range(1, n + 1):
            col[j] = d_node[j]
            if j >= 2:
                i = j - 1
                g = (q_node[i - 1] * prev1[i - 1] + q_half[i] * d_half[i]
                     + q_half[i - 1] * d_half[i - 1])
                col[i] = ((prev1[i - 1] + d_half[i] - d_half[i - 1] - hh / 8 * g)
                          / (1 + hh * q_node[i] / 8))
            for i in range(1, j - 1):
                g = (q_node[i - 1] * prev1[i - 1] + q_node[i + 1] * prev1[i + 1]
                     + q_node[i] * prev2[i])
                col[i] = ((prev1[i - 1] + prev1[i + 1] - prev2[i] - hh / 4 * g)
                          / (1 + hh * q_node[i] / 4))
            row1[j] = col[1]
            if n >= 2:
                row2[j] = col[2]
            tmp = prev2
            prev2 = prev1
            prev1 = col
            col = tmp
    return r1, r2


def char_rect_march(double[::1] q_half, front, double h, Py_ssize_t p_count,
                    Py_ssize_t m_count):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((p_count + 1, m_count + 1))
    cdef double[:, ::1] W = out
    cdef double[::1] fr = np.ascontiguousarray(front, dtype=np.float64)
    cdef double hh = h * h, g, qT
    cdef Py_ssize_t p, m, k
    for m in range(m_count + 1):
        W[0, m] = fr[m]
    with nogil:
        for p in range(1, p_count + 1):
            for m in range(1, m_count + 1):
                k = p + m_count - m
                qT = q_half[k]
                g = q_half[k - 1] * W[p - 1, m] + q_half[k + 1] * W[p, m - 1] + qT * W[p - 1, m - 1]
                W[p, m] = ((W[p - 1, m] + W[p, m - 1] - W[p - 1, m - 1] - hh / 16 * g)
                           / (1 + hh * qT / 16))
    return out


def prufer_sweep(q_cells, double h, lam):
    cdef double[::1] qc = np.ascontiguousarray(q_cells, dtype=np.float64)
    lam_arr = np.ascontiguousarray(lam, dtype=np.float64)
    shape = lam_arr.shape
    cdef double[::1] lv = lam_arr.reshape(-1)
    cdef Py_ssize_t nl = lv.shape[0], nc = qc.shape[0], a, k
    theta_o = np.empty(nl)
    norm_o = np.empty(nl)
    y_o = np.empty(nl)
    dy_o = np.empty(nl)
    cdef double[::1] th = theta_o, nm = norm_o, yv = y_o, dyv = dy_o
    cdef double y, dy, y1, dy1, w2, c, s, x, om, icc, ics, iss, nrm, psi0
    cdef long zeros
    with nogil:
        for a in range(nl):
            y = 0.0
            dy = 1.0
            zeros = 0
            nrm = 0.0
            for k in range(nc):
                w2 = lv[a] - qc[k]
                _real_cs(w2, h, &c, &s)
                x = w2 * h * h
                icc = 0.5 * (h + c * s)
                ics = 0.5 * s * s
                if fabs(x) < SERIES_CUT:
                    iss = h * h * h * (1.0 / 3 - x / 15 + 2 * x * x / 315 - x * x * x / 2835)
                else:
                    iss = (h - c * s) / (2 * w2)
                nrm += y * y * icc + 2 * y * dy * ics + dy * dy * iss
                y1 = c * y + s * dy
                dy1 = -w2 * s * y + c * dy
                if w2 > 0:
                    om = sqrt(w2)
                    psi0 = fmod(atan2(om * y, dy), M_PI)
                    if psi0 < 0:
                        psi0 += M_PI
                    zeros += <long>floor((psi0 + om * h) / M_PI)
                elif y * y1 < 0 or (y1 == 0 and y != 0):
                    zeros += 1
                y = y1
                dy = dy1
            psi0 = fmod(atan2(y, dy), M_PI)
            if psi0 < 0:
                psi0 += M_PI
            th[a] = zeros * M_PI + psi0
            nm[a] = nrm
            yv[a] = y
            dyv[a] = dy
    return (theta_o.reshape(shape), norm_o.reshape(shape), y_o.reshape(shape),
            dy_o.reshape(shape))


ctypedef fused scalar_t:
    double
    double complex


cdef inline void _cs(scalar_t w2, double h, scalar_t *c, scalar_t *s) nogil:
    if scalar_t is double:
        _real_cs(w2, h, c, s)
    else:
        _complex_cs(w2, h, c, s)


cdef void _cp_loop(scalar_t[::1] zv, double[::1] qc, double h, scalar_t[::1] y,
                   scalar_t[::1] dy, bint reverse, bint store, scalar_t[:, ::1] ys,
                   scalar_t[:, ::1] dys) nogil:
    cdef Py_ssize_t nz = zv.shape[0], nc = qc.shape[0], a, k, cell, pos
    cdef scalar_t w2, c, s, t
    if store:
        pos = nc if reverse else 0
        for a in range(nz):
            ys[pos, a] = y[a]
            dys[pos, a] = dy[a]
    for k in range(nc):
        cell = nc - 1 - k if reverse else k
        for a in range(nz):
            w2 = zv[a] - qc[cell]
            _cs(w2, h, &c, &s)
            if reverse:
                t = c * y[a] - s * dy[a]
                dy[a] = w2 * s * y[a] + c * dy[a]
            else:
                t = c * y[a] + s * dy[a]
                dy[a] = -w2 * s * y[a] + c * dy[a]
            y[a] = t
        if store:
            pos = cell if reverse else cell + 1
            for a in range(nz):
                ys[pos, a] = y[a]
                dys[pos, a] = dy[a]


def cp_propagate(q_cells, double h, z, y0, dy0, bint reverse=False, bint store=False):
    zc = np.asarray(z)
    is_complex = (np.iscomplexobj(zc) or np.iscomplexobj(y0) or np.iscomplexobj(dy0))
    dtype = np.complex128 if is_complex else np.float64
    zf = np.ascontiguousarray(zc.reshape(-1), dtype=dtype)
    cdef double[::1] qc = np.ascontiguousarray(q_cells, dtype=np.float64)
    nz, nc = zf.shape[0], qc.shape[0]
    y = np.array(np.broadcast_to(np.asarray(y0, dtype=dtype), zc.shape)).reshape(-1)
    dy = np.array(np.broadcast_to(np.asarray(dy0, dtype=dtype), zc.shape)).reshape(-1)
    shape = (nc + 1, nz) if store else (1, 1)
    ys = np.empty(shape, dtype=dtype)
    dys = np.empty(shape, dtype=dtype)
    cdef double[::1] zr, yr, dyr
    cdef double[:, ::1] ysr, dysr
    cdef double complex[::1] zz, yz, dyz
    cdef double complex[:, ::1] ysz, dysz
    if is_complex:
        zz, yz, dyz, ysz, dysz = zf, y, dy, ys, dys
        with nogil:
            _cp_loop(zz, qc, h, yz, dyz, reverse, store, ysz, dysz)
    else:
        zr, yr, dyr, ysr, dysr = zf, y, dy, ys, dys
        with nogil:
            _cp_loop(zr, qc, h, yr, dyr, reverse, store, ysr, dysr)
    if store:
        return ys, dys
    return y.reshape(zc.shape), dy.reshape(zc.shape)


def wave_leapfrog(q_node, double h, inc_right, u0, u1):
    cdef double[::1] qv = np.ascontiguousarray(q_node, dtype=np.float64)
    cdef double[::1] inc = np.ascontiguousarray(inc_right, dtype=np.float64)
    cdef Py_ssize_t nlev = inc.shape[0], nx = qv.shape[0], n, i
    cdef double hh = h * h, o
    a0 = np.array(u0, dtype=np.float64)
    a1 = np.array(u1, dtype=np.float64)
    a2 = np.empty_like(a1)
    cdef double[::1] v0 = a0, v1 = a1, v2 = a2, tmp
    out_arr = np.empty(nlev - 2)
    cdef double[::1] out = out_arr
    with nogil:
        for n in range(1, nlev - 1):
            for i in range(1, nx - 1):
                v2[i] = v1[i + 1] + v1[i - 1] - v0[i] - hh * qv[i] * v1[i]
            v2[0] = 0.0
            o = v1[nx - 2] - inc[n - 1]
            v2[nx - 1] = inc[n + 1] + o
            out[n - 1] = o
            tmp = v0
            v0 = v1
            v1 = v2
            v2 = tmp
    return out_arr
