"""Pure-Python reference implementations of the hot sampling loops.

These mirror ``regenboot.kernels._ckernels`` operation for operation. Both
backends consume pre-drawn random variates and must produce bit-identical
output for identical inputs, so every arithmetic expression here appears in
the exact same form (and evaluation order) in the Cython source.
"""

from math import sqrt

BACKEND_NAME = "python"


def reflected_em_chunk(x, z, dt, sqrt_dt, b_vals, r_vals, inv_dx, m, out, out_start):
    """Advance len(z) Euler substeps from state x, recording every m-th substep.

    Drift and dispersion are linearly interpolated from uniform tabulations
    over [0, 1] (``inv_dx`` = number of grid cells). Each substep is folded
    back into [0, 1] by mirror reflection. len(z) must be a multiple of m.
    Returns the state after the last substep; observations land in
    ``out[out_start:out_start + len(z)//m]``.
    """
    b_tab = b_vals.tolist()
    r_tab = r_vals.tolist()
    z_tab = z.tolist()
    nmax = len(b_tab) - 2
    k = out_start
    phase = 0
    for zi in z_tab:
        u = x * inv_dx
        j = int(u)
        if j > nmax:
            j = nmax
        frac = u - j
        b = b_tab[j] + (b_tab[j + 1] - b_tab[j]) * frac
        r = r_tab[j] + (r_tab[j + 1] - r_tab[j]) * frac
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


def finite_chain_chunk(cum_rows, state, u, out):
    """Simulate len(u) steps of a finite-state chain by inverse CDF.

    ``cum_rows`` is the row-wise cumulative transition matrix with the last
    column forced to 1.0; the successor of state s under uniform draw v is
    the smallest j with v < cum_rows[s][j]. Writes the visited states into
    ``out`` and returns the final state.
    """
    rows = cum_rows.tolist()
    u_tab = u.tolist()
    s = state
    for t, v in enumerate(u_tab):
        row = rows[s]
        j = 0
        while v >= row[j]:
            j += 1
        s = j
        out[t] = s
    return s


def grid_chain_chunk(p_rows, dy, inv_dx, x, u, out):
    """Simulate len(u) steps of a grid-tabulated chain on [0, 1].

    The transition density for the current state x is the linear
    interpolation (in x) between adjacent rows of ``p_rows``; in y it is
    piecewise linear on the uniform grid with spacing ``dy``. Sampling
    inverts the resulting piecewise-quadratic CDF exactly. Writes successive
    states into ``out`` and returns the final state.
    """
    rows = p_rows.tolist()
    u_tab = u.tolist()
    g = len(rows)
    nmax = g - 2
    for t, v in enumerate(u_tab):
        pos = x * inv_dx
        i = int(pos)
        if i > nmax:
            i = nmax
        frac = pos - i
        row_lo = rows[i]
        row_hi = rows[i + 1]
        # interpolated density at the y-grid nodes, with running total mass
        w = [0.0] * g
        total = 0.0
        prev = row_lo[0] + (row_hi[0] - row_lo[0]) * frac
        w[0] = prev
        for j in range(1, g):
            wj = row_lo[j] + (row_hi[j] - row_lo[j]) * frac
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
