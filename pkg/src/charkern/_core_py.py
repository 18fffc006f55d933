"""NumPy implementations of the inner loops in ``_core.pyx``.

Used when the compiled extension is unavailable, or when
``CHARKERN_PURE_PYTHON`` is set.
"""
import numpy as np


def _phase_setup(moduli):
    mod = np.asarray(moduli, dtype=np.int64)
    n = int(np.prod(mod))
    lcm = int(np.lcm.reduce(mod))
    scale = lcm // mod
    r = np.arange(lcm) * (2.0 * np.pi / lcm)
    ctab = np.cos(r)
    stab = np.sin(r)
    for q, (c, s) in enumerate(((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))):
        if (q * lcm) % 4 == 0:
            ctab[q * lcm // 4] = c
            stab[q * lcm // 4] = s
    digits = np.stack(np.unravel_index(np.arange(n), tuple(mod)), axis=1).astype(np.int64)
    return mod, n, lcm, scale, ctab, stab, digits


def _phases(moduli):
    mod, n, lcm, scale, ctab, stab, digits = _phase_setup(moduli)
    return (digits * scale) @ digits.T % lcm, ctab, stab, n


def gegenbauer_table(n_max, lam, t):
    t = np.asarray(t, dtype=np.float64).ravel()
    out = np.empty((n_max + 1, t.size))
    out[0] = 1.0
    if n_max == 0:
        return out
    if lam == 0.0:
        out[1] = t
        for n in range(2, n_max + 1):
            out[n] = 2.0 * t * out[n - 1] - out[n - 2]
    else:
        out[1] = 2.0 * lam * t
        for n in range(2, n_max + 1):
            out[n] = (2.0 * t * (n + lam - 1.0) * out[n - 1]
                      - (n + 2.0 * lam - 2.0) * out[n - 2]) / n
    return out


def group_gram(kappa, moduli):
    mod = np.asarray(moduli, dtype=np.int64)
    kappa = np.asarray(kappa, dtype=np.float64)
    n = int(np.prod(mod))
    digits = np.stack(np.unravel_index(np.arange(n), tuple(mod)), axis=1)
    diff = (digits[None, :, :] - digits[:, None, :]) % mod
    flat = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), tuple(mod))
    return kappa[flat]


def character_analysis(values, moduli):
    ph, ctab, stab, n = _phases(moduli)
    v = np.asarray(values, dtype=np.float64)
    return ctab[ph] @ v / n, stab[ph] @ v / n


def character_synthesis(coeffs, moduli):
    ph, ctab, _, _ = _phases(moduli)
    return ctab[ph].T @ np.asarray(coeffs, dtype=np.float64)


def kernel_scores(gram, forecasts, obs):
    K = np.asarray(gram, dtype=np.float64)
    P = np.atleast_2d(np.asarray(forecasts, dtype=np.float64))
    obs = np.asarray(obs, dtype=np.int64)
    KP = P @ K
    return -KP[np.arange(P.shape[0]), obs] + 0.5 * np.einsum("ri,ri->r", KP, P)
