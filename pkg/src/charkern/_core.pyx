# cython: language_level=3
"""Compiled inner loops. Signatures mirror ``charkern._core_py`` exactly."""
import numpy as np

from libc.math cimport cos, sin, M_PI


def _phase_setup(moduli):
    mod = np.ascontiguousarray(moduli, dtype=np.int64)
    n = int(np.prod(mod))
    lcm = int(np.lcm.reduce(mod))
    scale = (lcm // mod).astype(np.int64)
    r = np.arange(lcm, dtype=np.float64) * (2.0 * M_PI / lcm)
    ctab = np.cos(r)
    stab = np.sin(r)
    # exact values at the quarter points keep Z2/Z4 tables free of rounding
    for q, (c, s) in enumerate(((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))):
        if (q * lcm) % 4 == 0:
            ctab[q * lcm // 4] = c
            stab[q * lcm // 4] = s
    digits = np.stack(np.unravel_index(np.arange(n), tuple(mod)), axis=1).astype(np.int64)
    return mod, n, lcm, scale, ctab, stab, np.ascontiguousarray(digits)


def gegenbauer_table(int n_max, double lam, t):
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t m = tv.shape[0]
    out = np.empty((n_max + 1, m), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t j
    cdef int n
    for j in range(m):
        c[0, j] = 1.0
    if n_max == 0:
        return out
    if lam == 0.0:
        for j in range(m):
            c[1, j] = tv[j]
        for n in range(2, n_max + 1):
            for j in range(m):
                c[n, j] = 2.0 * tv[j] * c[n - 1, j] - c[n - 2, j]
    else:
        for j in range(m):
            c[1, j] = 2.0 * lam * tv[j]
        for n in range(2, n_max + 1):
            for j in range(m):
                c[n, j] = (2.0 * tv[j] * (n + lam - 1.0) * c[n - 1, j]
                           - (n + 2.0 * lam - 2.0) * c[n - 2, j]) / n
    return out


def group_gram(kappa, moduli):
    mod, n, lcm, scale, ctab, stab, digits = _phase_setup(moduli)
    cdef const double[::1] kv = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef long long[:, ::1] dg = digits
    cdef long long[::1] md = mod
    cdef Py_ssize_t d = md.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] g = out
    cdef Py_ssize_t x, y, j
    cdef long long flat, diff
    for x in range(n):
        for y in range(n):
            flat = 0
            for j in range(d):
                diff = dg[y, j] - dg[x, j]
                if diff < 0:
                    diff += md[j]
                flat = flat * md[j] + diff
            g[x, y] = kv[flat]
    return out


def character_analysis(values, moduli):
    mod, n, lcm, scale, ctab, stab, digits = _phase_setup(moduli)
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef long long[:, ::1] dg = digits
    cdef long long[::1] sc = scale
    cdef double[::1] ct = ctab
    cdef double[::1] st = stab
    cdef long long L = lcm
    cdef Py_ssize_t d = sc.shape[0]
    re_out = np.empty(n, dtype=np.float64)
    im_out = np.empty(n, dtype=np.float64)
    cdef double[::1] re = re_out
    cdef double[::1] im = im_out
    cdef Py_ssize_t i, x, j
    cdef long long ph
    cdef double sr, si
    for i in range(n):
        sr = 0.0
        si = 0.0
        for x in range(n):
            ph = 0
            for j in range(d):
                ph += dg[i, j] * dg[x, j] * sc[j]
            ph %= L
            sr += v[x] * ct[ph]
            si += v[x] * st[ph]
        re[i] = sr / n
        im[i] = si / n
    return re_out, im_out


def character_synthesis(coeffs, moduli):
    mod, n, lcm, scale, ctab, stab, digits = _phase_setup(moduli)
    cdef const double[::1] lam = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef long long[:, ::1] dg = digits
    cdef long long[::1] sc = scale
    cdef double[::1] ct = ctab
    cdef long long L = lcm
    cdef Py_ssize_t d = sc.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] kap = out
    cdef Py_ssize_t i, z, j
    cdef long long ph
    cdef double s
    for z in range(n):
        s = 0.0
        for i in range(n):
            if lam[i] == 0.0:
                continue
            ph = 0
            for j in range(d):
                ph += dg[i, j] * dg[z, j] * sc[j]
            s += lam[i] * ct[ph % L]
        kap[z] = s
    return out


def kernel_scores(gram, forecasts, obs):
    P_arr = np.ascontiguousarray(np.atleast_2d(forecasts), dtype=np.float64)
    # the matrix product goes to BLAS; only the reductions are looped here
    cdef const double[:, ::1] KP = np.ascontiguousarray(P_arr @ np.asarray(gram, dtype=np.float64))
    cdef const double[:, ::1] P = P_arr
    cdef const long long[::1] o = np.ascontiguousarray(obs, dtype=np.int64)
    cdef Py_ssize_t r = P.shape[0]
    cdef Py_ssize_t n = P.shape[1]
    out = np.empty(r, dtype=np.float64)
    cdef double[::1] s = out
    cdef Py_ssize_t a, i
    cdef double quad
    for a in range(r):
        quad = 0.0
        for i in range(n):
            quad += KP[a, i] * P[a, i]
        s[a] = -KP[a, o[a]] + 0.5 * quad
    return out
