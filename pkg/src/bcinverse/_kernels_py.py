"""Pure-Python/NumPy versions of the hot loops.

Every function here has a drop-in twin in ``_kernels.pyx``; ``kernels.py``
picks one at import time. Loops that are sequential by nature (characteristic
marching, cell-by-cell propagation) are vectorized over the independent axis.
"""

import numpy as np

SERIES_CUT = 1e-3


def transfer_cs(w2, h):
    """c = cos(sqrt(w2) h) and s = sin(sqrt(w2) h)/sqrt(w2), entire in w2."""
    w2 = np.asarray(w2)
    x = w2 * h * h
    small = np.abs(x) < SERIES_CUT
    om = np.sqrt(np.where(small, 1.0, w2).astype(complex))
    c = np.cos(om * h)
    s = np.sin(om * h) / om
    cs = 1 - x / 2 + x * x / 24 - x**3 / 720
    ss = h * (1 - x / 6 + x * x / 120 - x**3 / 5040)
    c = np.where(small, cs, c)
    s = np.where(small, ss, s)
    if not np.iscomplexobj(w2):
        c, s = c.real, s.real
    return c, s


def cell_square_integrals(w2, h, c, s):
    """Integrals over one cell of c(x)^2, c(x)s(x), s(x)^2 (x from 0 to h)."""
    x = w2 * h * h
    small = np.abs(x) < SERIES_CUT
    icc = 0.5 * (h + c * s)
    ics = 0.5 * s * s
    iss_ser = h**3 * (1 / 3 - x / 15 + 2 * x * x / 315 - x**3 / 2835)
    iss = np.where(small, iss_ser, (h - c * s) / (2 * np.where(small, 1.0, w2)))
    return icc, ics, iss


def goursat_march(q_node, q_half, d_node, d_half, h, n):
    """Characteristic march for w_ss - w_xx + q(x) w = 0 on 0 <= x <= s <= n h.

    Data: w(x, x) = d(x) (given at nodes ``d_node[i]`` = d(i h) and half
    nodes ``d_half[i]`` = d((i + 1/2) h)), w(0, s) = 0. ``q_node[i]`` = q(i h),
    ``q_half[i]`` = q((i + 1/2) h). Returns w[i, j] ~ w(i h, j h) for i <= j
    (entries below the diagonal are zero).
    """
    w = np.zeros((n + 1, n + 1))
    hh = h * h
    for j in range(1, n + 1):
        w[j, j] = d_node[j]
        if j >= 2:
            # node (j-1, j): half-rectangle against the diagonal
            i = j - 1
            g = (q_node[i - 1] * w[i - 1, i] + q_half[i] * d_half[i]
                 + q_half[i - 1] * d_half[i - 1])
            w[i, j] = ((w[i - 1, i] + d_half[i] - d_half[i - 1] - hh / 8 * g)
                       / (1 + hh * q_node[i] / 8))
        if j >= 3:
            i = np.arange(1, j - 1)
            g = (q_node[i - 1] * w[i - 1, j - 1] + q_node[i + 1] * w[i + 1, j - 1]
                 + q_node[i] * w[i, j - 2])
            w[i, j] = ((w[i - 1, j - 1] + w[i + 1, j - 1] - w[i, j - 2] - hh / 4 * g)
                       / (1 + hh * q_node[i] / 4))
    return w


def goursat_rows(q_node, q_half, d_node, d_half, h, n):
    """Same march as ``goursat_march`` keeping two columns at a time.

    Returns w(h, s_j) and w(2h, s_j) for j = 0..n (zero where x > s), which
    is all the response extraction needs; memory is O(n).
    """
    hh = h * h
    row1 = np.zeros(n + 1)
    row2 = np.zeros(n + 1)
    prev2 = np.zeros(n + 1)  # column j - 2
    prev1 = np.zeros(n + 1)  # column j - 1
    for j in range(1, n + 1):
        col = np.zeros(n + 1)
        col[j] = d_node[j]
        if j >= 2:
            i = j - 1
            g = (q_node[i - 1] * prev1[i - 1] + q_half[i] * d_half[i]
                 + q_half[i - 1] * d_half[i - 1])
            col[i] = ((prev1[i - 1] + d_half[i] - d_half[i - 1] - hh / 8 * g)
                      / (1 + hh * q_node[i] / 8))
        if j >= 3:
            i = np.arange(1, j - 1)
            g = (q_node[i - 1] * prev1[i - 1] + q_node[i + 1] * prev1[i + 1]
                 + q_node[i] * prev2[i])
            col[i] = ((prev1[i - 1] + prev1[i + 1] - prev2[i] - hh / 4 * g)
                      / (1 + hh * q_node[i] / 4))
        row1[j] = col[1]
        if n >= 2:
            row2[j] = col[2]
        prev2, prev1 = prev1, col
    return row1, row2


def char_rect_march(q_half, front, h, p_count, m_count):
    """March W_{xi zeta} = -q W / 4 on a characteristic rectangle.

    Lattice xi = p h (p = 0..p_count), zeta = -m_count h + m h
    (m = 0..m_count). Data: W(0, zeta_m) = front[m]; W(xi, zeta_0) = 0.
    ``q_half[k]`` = q(k h / 2); the node (p, m) sits at x index
    k = p + m_count - m. Returns W[p, m].
    """
    W = np.zeros((p_count + 1, m_count + 1))
    W[0, :] = front
    hh = h * h
    # sweep along anti-diagonals d = p + m so each front is vectorized
    for d in range(2, p_count + m_count + 1):
        p = np.arange(max(1, d - m_count), min(p_count, d - 1) + 1)
        m = d - p
        ok = m >= 1
        p, m = p[ok], m[ok]
        if p.size == 0:
            continue
        # corners L = (p-1, m), R = (p, m-1), B = (p-1, m-1), top = (p, m);
        # B and top share the same x
        k = p + m_count - m
        qT = q_half[k]
        g = q_half[k - 1] * W[p - 1, m] + q_half[k + 1] * W[p, m - 1] + qT * W[p - 1, m - 1]
        W[p, m] = ((W[p - 1, m] + W[p, m - 1] - W[p - 1, m - 1] - hh / 16 * g)
                   / (1 + hh * qT / 16))
    return W


def prufer_sweep(q_cells, h, lam):
    """Propagate phi(0) = 0, phi'(0) = 1 through piecewise-constant cells.

    Returns (theta, norm2, y, dy) at the right end for every lam: the lifted
    Prufer angle theta = atan2(phi, phi') (continuous in x and lam), the
    integral of phi^2 and the end state.
    """
    lam = np.asarray(lam, dtype=float)
    y = np.zeros_like(lam)
    dy = np.ones_like(lam)
    zeros = np.zeros(lam.shape, dtype=np.int64)
    norm2 = np.zeros_like(lam)
    for qk in q_cells:
        w2 = lam - qk
        c, s = transfer_cs(w2, h)
        icc, ics, iss = cell_square_integrals(w2, h, c, s)
        norm2 += y * y * icc + 2 * y * dy * ics + dy * dy * iss
        y1 = c * y + s * dy
        dy1 = -w2 * s * y + c * dy
        osc = w2 > 0
        om = np.sqrt(np.where(osc, w2, 1.0))
        psi0 = np.mod(np.arctan2(om * y, dy), np.pi)
        n_osc = np.floor((psi0 + om * h) / np.pi).astype(np.int64)
        n_ev = ((y * y1 < 0) | ((y1 == 0) & (y != 0))).astype(np.int64)
        zeros += np.where(osc, n_osc, n_ev)
        y, dy = y1, dy1
    theta = zeros * np.pi + np.mod(np.arctan2(y, dy), np.pi)
    return theta, norm2, y, dy


def cp_propagate(q_cells, h, z, y0, dy0, reverse=False, store=False):
    """Exact transfer through piecewise-constant cells for -y'' + q y = z y.

    ``z`` is a 1-D array (real or complex); ``y0``/``dy0`` are the starting
    values (broadcast against ``z``) at the left end, or at the right end
    when ``reverse``. With ``store`` the states at every cell boundary are
    returned as arrays of shape (ncells + 1, z.size), ordered left to right.
    """
    z = np.asarray(z)
    dtype = complex if (np.iscomplexobj(z) or np.iscomplexobj(y0)
                        or np.iscomplexobj(dy0)) else float
    y = np.broadcast_to(np.asarray(y0, dtype=dtype), z.shape).copy()
    dy = np.broadcast_to(np.asarray(dy0, dtype=dtype), z.shape).copy()
    ncell = len(q_cells)
    if store:
        ys = np.empty((ncell + 1, z.size), dtype=dtype)
        dys = np.empty_like(ys)
        pos = ncell if reverse else 0
        ys[pos], dys[pos] = y, dy
    order = range(ncell - 1, -1, -1) if reverse else range(ncell)
    for k in order:
        w2 = z - q_cells[k]
        c, s = transfer_cs(w2, h)
        if reverse:
            y, dy = c * y - s * dy, w2 * s * y + c * dy
        else:
            y, dy = c * y + s * dy, -w2 * s * y + c * dy
        if store:
            pos = k if reverse else k + 1
            ys[pos], dys[pos] = y, dy
    if store:
        return ys, dys
    return y, dy


def wave_leapfrog(q_node, h, inc_right, u0, u1):
    """Characteristic (CFL = 1) scheme for u_tt - u_xx + q u = 0 on [0, L].

    Dirichlet u = 0 at x = 0. At x = L the field is the sum of a known
    left-moving wave, whose value at x = L on time level n is
    ``inc_right[n]``, and an outgoing right-moving wave passed through
    exactly (q must vanish near x = L). ``u0``/``u1`` are levels 0 and 1.
    Returns the outgoing trace at x = L on levels 2 .. len(inc_right) - 1.
    """
    hh = h * h
    nlev = len(inc_right)
    out = np.empty(nlev - 2)
    u0, u1 = np.array(u0, dtype=float), np.array(u1, dtype=float)
    qi = q_node[1:-1]
    for n in range(1, nlev - 1):
        u2 = np.empty_like(u1)
        u2[1:-1] = u1[2:] + u1[:-2] - u0[1:-1] - hh * qi * u1[1:-1]
        u2[0] = 0.0
        # outgoing part one node inside the boundary moves out in one step;
        # the incoming part there equals inc_right one level earlier
        o = u1[-2] - inc_right[n - 1]
        u2[-1] = inc_right[n + 1] + o
        out[n - 1] = o
        u0, u1 = u1, u2
    return out
