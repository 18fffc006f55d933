"""Kernels on finite spaces: scores, MMD, kernel calculus and verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from . import _backend
from .exceptions import PSDViolationError, SpaceMismatchError, ValidationError
from .measure import DiscreteSpace, SignedMeasure, product_space, tv_norm

TAU_PSD = 1e-10
TAU_EIG = 1e-10

Decision = Literal["yes", "no", "unknown"]


def _frozen(a):
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A symmetric PSD kernel on a finite space, stored as its Gram matrix."""

    space: DiscreteSpace
    gram: np.ndarray

    def __init__(self, space: DiscreteSpace, gram, *, symmetrize: bool = False):
        K = np.asarray(gram, dtype=float)
        n = len(space)
        if K.shape != (n, n):
            raise ValidationError(f"gram has shape {K.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(K)):
            raise ValidationError("gram entries must be finite")
        if symmetrize:
            K = 0.5 * (K + K.T)
        elif not np.array_equal(K, K.T):
            raise ValidationError("gram matrix is not exactly symmetric")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "gram", _frozen(K))
        ev = self.eigenvalues
        scale = max(abs(ev[0]), abs(ev[-1])) if ev.size else 0.0
        if ev.size and ev[0] < -TAU_PSD * scale:
            raise PSDViolationError(
                f"gram has eigenvalue {ev[0]:.3e} below -{TAU_PSD:g}*{scale:.3e}"
            )

    @cached_property
    def _eigh(self):
        w, V = np.linalg.eigh(self.gram)
        return w, V

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the (unweighted) Gram matrix, ascending."""
        return self._eigh[0]

    @property
    def sup_norm(self) -> float:
        """``max |k(x, x')|``, the sup norm of the kernel."""
        return float(np.abs(self.gram).max())

    def __call__(self, x, y) -> float:
        return float(self.gram[self.space.index(x), self.space.index(y)])

    def __repr__(self):
        return f"KernelSpec(n={len(self.space)})"

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "gram": self.gram.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        if "space" in d:
            space = DiscreteSpace.from_dict(d["space"])
        else:
            space = DiscreteSpace.uniform(len(d["gram"]))
        return cls(space, d["gram"], symmetrize=bool(d.get("symmetrize", False)))


@dataclass(frozen=True)
class KernelVerdict:
    characteristic: Decision
    universal: Decision
    sipd_on_M: Decision
    witnesses: tuple = ()
    reasons: tuple = ()
    strictly_pd: Decision | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.universal == "yes" and self.characteristic == "no":
            raise ValidationError("a universal kernel is always characteristic")

    def to_dict(self) -> dict:
        d = {
            "characteristic": self.characteristic,
            "universal": self.universal,
            "sipd_on_M": self.sipd_on_M,
            "witnesses": [np.asarray(w).tolist() for w in self.witnesses],
            "reasons": list(self.reasons),
        }
        if self.strictly_pd is not None:
            d["strictly_pd"] = self.strictly_pd
        d.update(self.extra)
        return d


def _check_space(k: KernelSpec, mu: SignedMeasure):
    if not k.space.same_as(mu.space):
        raise SpaceMismatchError("kernel and measure live on different spaces")


def kernel_score(k: KernelSpec, P: SignedMeasure, x) -> float:
    """Kernel score ``S_k(P, x) = -int k(w, x) dP(w) + 1/2 iint k dP dP``."""
    _check_space(k, P)
    P.require_probability("forecast")
    i = k.space.index(x)
    return float(_backend.kernel_scores(k.gram, P.mass[None, :], np.array([i]))[0])


def kernel_scores(k: KernelSpec, forecasts, observations) -> np.ndarray:
    """Vectorized :func:`kernel_score` over records.

    ``forecasts`` is an ``(r, n)`` array of probability vectors (or a list of
    :class:`SignedMeasure`) and ``observations`` a length-``r`` list of labels.
    """
    if len(forecasts) and isinstance(forecasts[0], SignedMeasure):
        for P in forecasts:
            _check_space(k, P)
            P.require_probability("forecast")
        F = np.stack([P.mass for P in forecasts])
    else:
        F = np.atleast_2d(np.asarray(forecasts, dtype=float))
        if F.shape[1] != len(k.space):
            raise SpaceMismatchError("forecast length does not match the kernel's space")
    obs = np.array([k.space.index(x) for x in observations], dtype=np.int64)
    return _backend.kernel_scores(k.gram, F, obs)


def mmd_sq(k: KernelSpec, mu: SignedMeasure) -> float:
    """Squared RKHS norm of the embedding of ``mu``: ``mass^T K mass``."""
    _check_space(k, mu)
    m = mu.mass
    val = float(m @ k.gram @ m)
    if val < 0:
        bound = TAU_PSD * k.sup_norm * tv_norm(mu) ** 2
        if val < -bound:
            raise PSDViolationError(f"negative squared norm {val:.3e}")
        return 0.0
    return val


def mmd_inner(k: KernelSpec, mu1: SignedMeasure, mu2: SignedMeasure) -> float:
    """``<Phi(mu1), Phi(mu2)>_H = iint k dmu1 dmu2``."""
    _check_space(k, mu1)
    _check_space(k, mu2)
    return float(mu1.mass @ k.gram @ mu2.mass)


def expected_score(k: KernelSpec, Q: SignedMeasure, P: SignedMeasure) -> float:
    """``int S_k(Q, x) dP(x)``: mean score of forecast Q when outcomes follow P."""
    _check_space(k, P)
    _check_space(k, Q)
    P.require_probability("P")
    Q.require_probability("Q")
    KQ = k.gram @ Q.mass
    return float(-(P.mass @ KQ) + 0.5 * (Q.mass @ KQ))


def propriety_gap(k: KernelSpec, P: SignedMeasure, Q: SignedMeasure) -> float:
    """``E_P S_k(Q, .) - E_P S_k(P, .)``; equals ``mmd_sq(k, P - Q) / 2``."""
    return expected_score(k, Q, P) - expected_score(k, P, P)


def sum_kernel(k1: KernelSpec, k2: KernelSpec) -> KernelSpec:
    if not k1.space.same_as(k2.space):
        raise SpaceMismatchError("sum kernel needs both kernels on the same space")
    return KernelSpec(k1.space, k1.gram + k2.gram)


def product_kernel(k1: KernelSpec, k2: KernelSpec) -> KernelSpec:
    """Tensor product kernel ``k1(x1, y1) * k2(x2, y2)`` on the product space."""
    return KernelSpec(product_space(k1.space, k2.space), np.kron(k1.gram, k2.gram))


def plus_one(k: KernelSpec) -> KernelSpec:
    return KernelSpec(k.space, k.gram + 1.0)


def null_space(eigvals: np.ndarray, eigvecs: np.ndarray, tau: float = TAU_EIG):
    """Columns of ``eigvecs`` whose eigenvalue is at most ``tau * max(eigvals)``."""
    top = float(eigvals.max()) if eigvals.size else 0.0
    cut = tau * top if top > 0 else 0.0
    return eigvecs[:, eigvals <= cut], eigvals > cut


def zero_sum_directions(basis: np.ndarray, weights: np.ndarray | None = None,
                        tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``{basis @ c : sum(weights * (basis @ c)) = 0}``.

    ``basis`` must have orthonormal columns (Euclidean). Returns a matrix whose
    columns span the zero-sum part of the column space.
    """
    r = basis.shape[1]
    if r == 0:
        return basis
    w = np.ones(basis.shape[0]) if weights is None else weights
    s = basis.T @ w
    if np.linalg.norm(s) <= tol * np.linalg.norm(w):
        return basis
    # complement of s inside R^r
    q, _ = np.linalg.qr(np.column_stack([s, np.eye(r)]))
    return basis @ q[:, 1:r]


def verdict(k: KernelSpec) -> KernelVerdict:
    """Characteristic/universal decision from the Gram matrix null space.

    On a finite space the kernel is universal (equivalently strictly integrally
    positive definite on all signed measures) iff the Gram matrix is strictly
    positive definite, and characteristic iff no nonzero zero-sum vector lies
    in its null space.
    """
    w, V = k._eigh
    null, _ = null_space(w, V)
    zs = zero_sum_directions(null)
    reasons = []
    universal = "yes" if null.shape[1] == 0 else "no"
    characteristic = "yes" if zs.shape[1] == 0 else "no"
    if universal == "no":
        reasons.append(f"gram has a {null.shape[1]}-dimensional null space")
    if characteristic == "no":
        reasons.append(
            f"{zs.shape[1]} zero-mass direction(s) have vanishing embedding"
        )
    elif universal == "no":
        reasons.append("null direction has nonzero total mass; M0 is still embedded injectively")
    witnesses = tuple(_sign_normalize(zs[:, j]) for j in range(zs.shape[1]))
    return KernelVerdict(characteristic, universal, universal, witnesses, tuple(reasons))


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))
    v = v / np.abs(v).max()
    return v if v[j] > 0 else -v
