# Compiled implementations of the hot sampling loops.
#
# Each function mirrors its counterpart in _pykernels.py expression for
# expression; the two backends must stay bit-identical (the build disables
# FP contraction for this reason). See _pykernels.py for the contracts.

from libc.math cimport sqrt

import numpy as np

BACKEND_NAME = "compiled"


def reflected_em_chunk(double x, const double[::1] z, double dt, double sqrt_dt,
                       const double[::1] b_vals, const double[::1] r_vals, double inv_dx,
                       Py_ssize_t m, double[::1] out, Py_ssize_t out_start):
    cdef Py_ssize_t nmax = b_vals.shape[0] - 2
    cdef Py_ssize_t k = out_start
    cdef Py_ssize_t phase = 0
    cdef Py_ssize_t i, j
    cdef double u, frac, b, r, zi
    for i in range(z.shape[0]):
        zi = z[i]
        u = x * inv_dx
        j = <Py_ssize_t>u
        if j > nmax:
            j = nmax
        frac = u - j
        b = b_vals[j] + (b_vals[j + 1] - b_vals[j]) * frac
        r = r_vals[j] + (r_vals[j + 1] - r_vals[j]) * frac
        x = x + b * dt + r * sqrt_dt * zi
        while x < 0.0 or x > 1.0:
            if x < 0.0:
                x = -x
            else:
                x = 2.0 - x
        phase += 1
        if phase == m:
            out[k] = x
            k += 1
            phase = 0
    return x


def finite_chain_chunk(const double[:, ::1] cum_rows, Py_ssize_t state,
                       const double[::1] u, long long[::1] out):
    cdef Py_ssize_t s = state
    cdef Py_ssize_t t, j
    cdef double v
    for t in range(u.shape[0]):
        v = u[t]
        j = 0
        while v >= cum_rows[s, j]:
            j += 1
        s = j
        out[t] = s
    return int(s)


def grid_chain_chunk(const double[:, ::1] p_rows, double dy, double inv_dx,
                     double x, const double[::1] u, double[::1] out):
    cdef Py_ssize_t g = p_rows.shape[0]
    cdef Py_ssize_t nmax = g - 2
    cdef double[::1] w = np.empty(g, dtype=np.float64)
    cdef Py_ssize_t t, i, j, cell
    cdef double v, pos, frac, total, prev, wj, target, acc, mass
    cdef double w0, w1, rem, a, s
    for t in range(u.shape[0]):
        v = u[t]
        pos = x * inv_dx
        i = <Py_ssize_t>pos
        if i > nmax:
            i = nmax
        frac = pos - i
        total = 0.0
        prev = p_rows[i, 0] + (p_rows[i + 1, 0] - p_rows[i, 0]) * frac
        w[0] = prev
        for j in range(1, g):
            wj = p_rows[i, j] + (p_rows[i + 1, j] - p_rows[i, j]) * frac
            w[j] = wj
            total += (prev + wj) * 0.5 * dy
            prev = wj
        target = v * total
        acc = 0.0
        cell = nmax
        for j in range(g - 1):
            mass = (w[j] + w[j + 1]) * 0.5 * dy
            if acc + mass >= target:
                cell = j
                break
            acc += mass
        w0 = w[cell]
        w1 = w[cell + 1]
        rem = target - acc
        a = (w1 - w0) / (2.0 * dy)
        if a > 1e-12 or a < -1e-12:
            s = (sqrt(w0 * w0 + 4.0 * a * rem) - w0) / (2.0 * a)
        elif w0 > 0.0:
            s = rem / w0
        else:
            s = 0.5 * dy
        if s < 0.0:
            s = 0.0
        elif s > dy:
            s = dy
        x = cell * dy + s
        out[t] = x
    return x
