"""Mercer expansions of the integral operator and the counterexample constructions.

All eigenfunctions are stored as value vectors on the space and are
orthonormal in ``L2(nu)``: ``sum_x e_i(x) e_j(x) nu(x) = delta_ij``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import PSDViolationError, PreconditionError, SpaceMismatchError, ValidationError
from .kernel import TAU_EIG, TAU_PSD, KernelSpec, KernelVerdict, zero_sum_directions
from .measure import DiscreteSpace, Density, SignedMeasure, hahn_jordan, mix, tv_norm

#: relative tolerance used to recognise a constant eigenfunction
TAU_CONST = 1e-8


@dataclass(frozen=True, eq=False)
class MercerExpansion:
    space: DiscreteSpace
    lambdas: np.ndarray
    eigfuncs: np.ndarray  # shape (n_funcs, n_points)
    index_of_one: int | None = None
    source_index: np.ndarray | None = None

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        E = np.array(self.eigfuncs, dtype=float)
        if E.ndim != 2 or E.shape[1] != len(self.space) or E.shape[0] != lam.size:
            raise ValidationError("eigfuncs must have shape (len(lambdas), len(space))")
        if np.any(np.diff(lam) > 0):
            raise ValidationError("lambdas must be sorted in nonincreasing order")
        if lam.size and lam[-1] < 0:
            raise ValidationError("lambdas must be nonnegative")
        for a in (lam, E):
            a.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "eigfuncs", E)

    @property
    def threshold(self) -> float:
        return TAU_EIG * float(self.lambdas[0]) if self.lambdas.size else 0.0

    @property
    def positive(self) -> np.ndarray:
        """Mask of eigenvalues above the numerical zero."""
        return self.lambdas > self.threshold

    def reconstruct(self) -> np.ndarray:
        return (self.eigfuncs.T * self.lambdas) @ self.eigfuncs

    def coefficients(self, f) -> np.ndarray:
        """``<f, e_i>_{L2(nu)}`` for all ``i``."""
        return self.eigfuncs @ (np.asarray(f, dtype=float) * self.space.nu)

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas.tolist(),
            "eigfuncs": self.eigfuncs.tolist(),
            "index_of_one": self.index_of_one,
        }


def _is_constant(v: np.ndarray) -> bool:
    scale = np.abs(v).max()
    return scale > 0 and np.ptp(v) <= TAU_CONST * scale


def _rotate_to_one(U: np.ndarray, w: np.ndarray, sqnu: np.ndarray):
    """Within each eigenvalue cluster, rotate so that the constant function is a basis vector.

    ``U`` holds Euclidean-orthonormal eigenvectors of the weighted matrix,
    ordered like ``w`` (descending). Returns the updated ``U`` and the column
    index of the constant direction, if it lies inside one eigenspace.
    """
    one = sqnu / np.linalg.norm(sqnu)
    scale = max(abs(w[0]), 1e-300)
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[start]) <= 1e-9 * scale:
            stop += 1
        block = U[:, start:stop]
        c = block.T @ one
        if np.linalg.norm(block @ c - one) <= TAU_CONST:
            q, _ = np.linalg.qr(np.column_stack([c, np.eye(stop - start)]))
            if q[:, 0] @ c < 0:
                q[:, 0] = -q[:, 0]
            U = U.copy()
            U[:, start:stop] = block @ q[:, : stop - start]
            return U, start
        start = stop
    return U, None


def mercer_decompose(k: KernelSpec) -> MercerExpansion:
    """Eigen-expansion of ``T_{k,nu}`` via the symmetric matrix ``D^1/2 K D^1/2``."""
    nu = k.space.nu
    sq = np.sqrt(nu)
    A = sq[:, None] * k.gram * sq[None, :]
    w, U = np.linalg.eigh(0.5 * (A + A.T))
    w, U = w[::-1], U[:, ::-1]
    scale = max(abs(w[0]), abs(w[-1]))
    if w[-1] < -TAU_PSD * scale:
        raise PSDViolationError(f"weighted gram has eigenvalue {w[-1]:.3e}")
    w = np.where(w < 0, 0.0, w)
    U, i0 = _rotate_to_one(U, w, sq)
    E = (U / sq[:, None]).T
    if i0 is not None:
        e = E[i0]
        if not _is_constant(e):
            i0 = None
        else:
            E[i0] = np.full_like(e, 1.0 / np.sqrt(nu.sum()))
    return MercerExpansion(k.space, w, E, i0)


def mmd_sq_spectral(m: MercerExpansion, h: Density, g: Density) -> float:
    """``sum_i lambda_i <h - g, e_i>^2`` in ``L2(nu)``."""
    for d in (h, g):
        if not d.space.same_as(m.space):
            raise SpaceMismatchError("density and expansion live on different spaces")
    c = m.coefficients(h.h - g.h)
    return float(m.lambdas @ c**2)


def _null_zero_mean(m: MercerExpansion) -> np.ndarray:
    """Functions (rows) in the zero eigenspace with vanishing nu-integral, L2(nu)-orthonormal."""
    Z = m.eigfuncs[~m.positive]
    sq = np.sqrt(m.space.nu)
    basis = (Z * sq).T  # Euclidean-orthonormal columns
    dirs = zero_sum_directions(basis, sq)
    return (dirs / sq[:, None]).T


def spectral_verdict(m: MercerExpansion) -> KernelVerdict:
    """Universal/characteristic decision from the eigenvalues and eigenfunctions."""
    pos = m.positive
    n_zero = int((~pos).sum())
    reasons = []
    universal = "yes" if n_zero == 0 else "no"
    if n_zero == 0:
        reasons.append("all eigenvalues are positive")
    else:
        reasons.append(f"{n_zero} eigenvalue(s) vanish")
    if n_zero >= 2:
        reasons.append("null space has dimension >= 2: not characteristic")
    one_in_range = False
    if n_zero == 1:
        z = m.eigfuncs[~pos][0]
        one_in_range = abs(float(z @ m.space.nu)) <= TAU_CONST * float(np.abs(z).max())
        if m.index_of_one is not None and not pos[m.index_of_one]:
            reasons.append("only the constant eigenfunction has a vanishing eigenvalue")
        elif one_in_range:
            reasons.append("one vanishing eigenvalue and the constant function lies in the range")
    witnesses = _null_zero_mean(m)
    characteristic = "yes" if witnesses.shape[0] == 0 else "no"
    return KernelVerdict(
        characteristic, universal, universal,
        tuple(w * m.space.nu for w in witnesses), tuple(reasons),
    )


def _pick_null_direction(m: MercerExpansion) -> np.ndarray:
    Z = m.eigfuncs[~m.positive]
    nu = m.space.nu
    for j in range(Z.shape[0]):
        f = Z[j]
        if abs(f @ nu) <= TAU_CONST * np.abs(f).max() * nu.sum():
            return f
        for l in range(j + 1, Z.shape[0]):
            g = Z[l]
            sf, sg = f @ nu, g @ nu
            cand = sg * f - sf * g
            if np.abs(cand).max() > 0:
                return cand / np.sqrt(cand**2 @ nu)
    raise PreconditionError("kernel has no L1 null direction with zero mean")


def zero_mmd_pair(m: MercerExpansion, P: Density, eps_tv: float) -> tuple[Density, Density]:
    """Two distinct densities near ``P`` whose embeddings coincide.

    Uses a zero-mean function ``f`` orthogonal to every eigenfunction with a
    positive eigenvalue, and returns ``h_i = (h + delta f^+-) / (1 + delta c)``
    with ``delta`` chosen so that the pair is exactly ``eps_tv`` apart in
    total variation.
    """
    if not 0.0 < eps_tv < 2.0:
        raise ValidationError("eps_tv must lie in (0, 2)")
    if not P.space.same_as(m.space):
        raise SpaceMismatchError("density and expansion live on different spaces")
    f = _pick_null_direction(m)
    nu = m.space.nu
    fp = np.maximum(f, 0.0)
    fm = np.maximum(-f, 0.0)
    c = float(fp @ nu)
    # {2 delta c / (1 + delta c)} sweeps (0, 2); invert for delta * c
    dc = eps_tv / (2.0 - eps_tv)
    delta = dc / c
    h1 = (P.h + delta * fp) / (1.0 + dc)
    h2 = (P.h + delta * fm) / (1.0 + dc)
    # the two parts of f carry equal mass only up to rounding
    h1 /= h1 @ nu
    h2 /= h2 @ nu
    return Density(m.space, h1), Density(m.space, h2)


def _zero_mean_candidates(m: MercerExpansion):
    """Eigenvectors of the kernel compressed to zero-mean functions."""
    nu = m.space.nu
    sq = np.sqrt(nu)
    U = (m.eigfuncs * sq).T
    A = (U * m.lambdas) @ U.T
    u0 = sq / np.linalg.norm(sq)
    Pi = np.eye(len(nu)) - np.outer(u0, u0)
    B = Pi @ A @ Pi
    w, V = np.linalg.eigh(0.5 * (B + B.T))
    keep = np.abs(V.T @ u0) < 0.5
    cands = [(V[:, j] / sq) for j in np.nonzero(keep)[0]]
    # zero-mean eigenfunctions themselves, in case the compression mixes a cluster
    for e in m.eigfuncs:
        if abs(e @ nu) <= TAU_CONST * np.abs(e).max():
            cands.append(e)
    return cands


def near_zero_mmd_pair(m: MercerExpansion, eps: float) -> tuple[SignedMeasure, SignedMeasure]:
    """Probability measures with disjoint supports (TV distance 2) and ``sqrt(MMD^2) <= eps``.

    The zero-mass measure ``mu = f dnu`` with the smallest ratio
    ``||mu||_H / mu^+(X)`` among small-eigenvalue zero-mean directions is split
    into its positive and negative parts, each normalized to a probability.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    nu = m.space.nu
    best = None
    for f in _zero_mean_candidates(m):
        if np.abs(f).max() == 0:
            continue
        c = m.coefficients(f)
        norm_sq = max(float(m.lambdas @ c**2), 0.0)
        half_tv = 0.5 * float(np.abs(f) @ nu)
        ratio = np.sqrt(norm_sq) / half_tv
        if best is None or ratio < best[0]:
            best = (ratio, f)
    if best is None:
        raise PreconditionError("space has no nonzero zero-mean direction")
    if best[0] > eps:
        raise PreconditionError(
            f"spectrum too flat: requested eps={eps:g} unachievable on this space "
            f"(best attainable {best[0]:.4g})"
        )
    mu = SignedMeasure(m.space, best[1] * nu)
    pos, neg = hahn_jordan(mu)
    Q1 = SignedMeasure(m.space, pos.mass / pos.total_mass)
    Q2 = SignedMeasure(m.space, neg.mass / neg.total_mass)
    return Q1, Q2


def near_zero_mmd_pair_local(m: MercerExpansion, P: SignedMeasure, delta: float,
                             eps: float) -> tuple[SignedMeasure, SignedMeasure]:
    """Pair within TV distance ``delta`` of ``P``, exactly ``delta`` apart, ``sqrt(MMD^2) <= eps``."""
    if not 0.0 < delta <= 2.0:
        raise ValidationError("delta must lie in (0, 2]")
    if not 0.0 < eps < delta:
        raise ValidationError("eps must lie in (0, delta)")
    P.require_probability("P")
    alpha = delta / 2.0
    T1, T2 = near_zero_mmd_pair(m, eps / alpha)
    return mix(alpha, P, T1), mix(alpha, P, T2)


@dataclass(frozen=True)
class UniformPerturbation:
    Q: SignedMeasure
    tv_lower: float
    mmd_sq_exact: float
    alpha: float
    c_inf: float
    c_1: float


def no_uniform_perturbation(m: MercerExpansion, j: int) -> UniformPerturbation:
    """``Q_j = (1 + e_j / c_inf) dnu``: a probability measure whose distance to ``nu``
    is bounded below in TV while its squared MMD is exactly ``lambda_j / c_inf^2``.
    """
    nu = m.space.nu
    if not m.space.is_probability:
        raise PreconditionError("the reference measure must be a probability measure")
    i0 = m.index_of_one
    if i0 is None:
        raise PreconditionError("no eigenfunction equals the constant function")
    if not 0 <= j < m.lambdas.size or j == i0:
        raise PreconditionError(f"index {j} must differ from the constant index {i0}")
    E = m.eigfuncs
    c_inf = float(np.abs(E).max())
    c_1 = float((np.abs(E) @ nu).min())
    alpha = 1.0 / c_inf
    h = 1.0 + alpha * E[j]
    h = np.maximum(h, 0.0)  # |alpha e_j| <= 1 holds up to rounding at the maximizer
    Q = SignedMeasure(m.space, h * nu)
    return UniformPerturbation(Q, c_1 / c_inf, float(m.lambdas[j]) / c_inf**2, alpha, c_inf, c_1)


def tv_distance(P: SignedMeasure, Q: SignedMeasure) -> float:
    return tv_norm(P - Q)
