"""Translation-invariant kernels on finite Abelian groups ``Z_m1 x ... x Z_md``.

Group elements and character indices are both enumerated in row-major
(C) order over the moduli; the character with index ``i`` is
``e_i(x) = exp(2 pi i sum_j i_j x_j / m_j)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from ._core_py import _phase_setup
from .exceptions import ValidationError
from .kernel import TAU_EIG, KernelSpec, KernelVerdict
from .measure import DiscreteSpace
from .spectral import MercerExpansion

I0, IPLUS, IMINUS = 0, 1, -1


@dataclass(frozen=True)
class GroupSpec:
    moduli: tuple

    def __init__(self, moduli):
        mods = tuple(int(m) for m in (moduli if np.iterable(moduli) else (moduli,)))
        if not mods or any(m < 2 for m in mods):
            raise ValidationError("moduli must be integers >= 2")
        object.__setattr__(self, "moduli", mods)

    @property
    def order(self) -> int:
        return int(np.prod(self.moduli))

    @cached_property
    def elements(self) -> np.ndarray:
        """``(N, d)`` integer array of element coordinates in flat order."""
        idx = np.unravel_index(np.arange(self.order), self.moduli)
        return np.stack(idx, axis=1)

    def flat(self, x) -> int:
        return int(np.ravel_multi_index(tuple(np.mod(x, self.moduli)), self.moduli))

    def neg(self, i) -> int:
        """Flat index of ``-i``."""
        return self.flat(-self.elements[int(i)])

    @cached_property
    def negation(self) -> np.ndarray:
        neg = np.mod(-self.elements, self.moduli)
        return np.ravel_multi_index(tuple(neg.T), self.moduli)

    def labels(self) -> list[str]:
        return [",".join(map(str, row)) for row in self.elements]

    @cached_property
    def space(self) -> DiscreteSpace:
        """The group as a finite space with normalized Haar weights."""
        return DiscreteSpace(self.labels(), np.full(self.order, 1.0 / self.order))

    @cached_property
    def classes(self) -> np.ndarray:
        """Partition label per character index: 0 for I0, +1 for I+, -1 for I-.

        Of each pair ``{i, -i}`` the lexicographically smaller tuple goes to I+.
        """
        neg = self.negation
        ar = np.arange(self.order)
        out = np.where(neg == ar, I0, np.where(ar < neg, IPLUS, IMINUS))
        return out


def character(g: GroupSpec, i, x) -> complex:
    """Value of character ``e_i`` at element ``x`` (tuples or flat indices)."""
    ii = g.elements[i] if np.isscalar(i) else np.asarray(i)
    xx = g.elements[x] if np.isscalar(x) else np.asarray(x)
    _, _, lcm, scale, ctab, stab, _ = _phase_setup(g.moduli)
    ph = int(np.sum(np.asarray(ii) * np.asarray(xx) * scale)) % lcm
    return complex(ctab[ph], stab[ph])


def character_table(g: GroupSpec) -> np.ndarray:
    """Complex ``(N, N)`` matrix ``T[i, x] = e_i(x)``, phases in exact integer arithmetic."""
    _, _, lcm, scale, ctab, stab, digits = _phase_setup(g.moduli)
    ph = (digits * scale) @ digits.T % lcm
    return ctab[ph] + 1j * stab[ph]


def real_onb(g: GroupSpec) -> np.ndarray:
    """Real orthonormal basis ``e_i*`` of ``L2(Haar)``, one row per index ``i``.

    ``Re e_i`` on self-inverse indices, ``sqrt(2) Re e_i`` on I+ and
    ``sqrt(2) Im e_i`` on I-.
    """
    T = character_table(g)
    cls = g.classes[:, None]
    E = np.where(cls == I0, T.real, np.sqrt(2.0) * np.where(cls == IPLUS, T.real, T.imag))
    # Im e_i vanishes identically on I0
    return E


@dataclass(frozen=True, eq=False)
class GroupKernel:
    group: GroupSpec
    coeffs: np.ndarray
    kappa: np.ndarray | None
    translation_invariant: bool = True

    @cached_property
    def spec(self) -> KernelSpec:
        g = self.group
        if self.translation_invariant:
            K = _backend.group_gram(self.kappa, g.moduli)
            return KernelSpec(g.space, K)
        E = real_onb(g)
        return KernelSpec(g.space, (E.T * self.coeffs) @ E, symmetrize=True)

    def gram_series(self) -> np.ndarray:
        """Gram from the eigenfunction form ``sum_i lambda_i e_i*(x) e_i*(x')``."""
        E = real_onb(self.group)
        return (E.T * self.coeffs) @ E

    def gram_cosine(self) -> np.ndarray:
        """Gram from the cosine form ``sum_i lambda_i Re e_i(x - x')``."""
        kap = _backend.character_synthesis(self.coeffs, self.group.moduli)
        return _backend.group_gram(kap, self.group.moduli)


def _symmetric(g: GroupSpec, lam: np.ndarray) -> bool:
    return np.array_equal(lam, lam[g.negation])


def kernel_from_coeffs(g: GroupSpec, coeffs, *, symmetrize: bool = True) -> GroupKernel:
    """Kernel ``k(x, x') = sum_i lambda_i e_i*(x) e_i*(x')``.

    ``coeffs`` is a length-``N`` array in flat index order or a mapping from
    index tuples to values (missing entries are zero). Coefficients must
    satisfy ``lambda_i = lambda_{-i}`` for the kernel to be translation
    invariant; asymmetric input is averaged with a warning. With
    ``symmetrize=False`` asymmetric input is kept as given and yields a PSD
    kernel that has the ``e_i*`` as eigenfunctions but is not translation
    invariant.
    """
    lam = _coeff_array(g, coeffs)
    if np.any(lam < 0):
        raise ValidationError("kernel coefficients must be nonnegative")
    ti = True
    if not _symmetric(g, lam):
        if symmetrize:
            warnings.warn("coefficients with lambda_i != lambda_-i were symmetrized",
                          stacklevel=2)
            lam = 0.5 * (lam + lam[g.negation])
        else:
            ti = False
    lam.setflags(write=False)
    kappa = None
    if ti:
        kappa = _backend.character_synthesis(lam, g.moduli)
        kappa = 0.5 * (kappa + kappa[g.negation])
        kappa.setflags(write=False)
    return GroupKernel(g, lam, kappa, ti)


def _coeff_array(g: GroupSpec, coeffs) -> np.ndarray:
    if isinstance(coeffs, dict):
        lam = np.zeros(g.order)
        for key, val in coeffs.items():
            idx = key if isinstance(key, int) else g.flat(_parse_index(key))
            lam[idx] = float(val)
        return lam
    lam = np.array(coeffs, dtype=float).ravel()
    if lam.size != g.order:
        raise ValidationError(f"expected {g.order} coefficients, got {lam.size}")
    return lam


def _parse_index(key):
    if isinstance(key, str):
        return tuple(int(s) for s in key.replace("(", "").replace(")", "").split(","))
    return tuple(key)


def coeffs_from_kernel(g: GroupSpec, kappa, *, tol: float = 1e-12) -> np.ndarray:
    """Coefficients ``lambda_i = (1/N) sum_x kappa(x) e_i(x)`` of ``k(x, x') = kappa(x' - x)``.

    Negative coefficients mean ``kappa`` does not define a kernel; they are
    returned as computed and reported with a warning.
    """
    kap = np.asarray(kappa, dtype=float).ravel()
    if kap.size != g.order:
        raise ValidationError(f"expected {g.order} kappa values, got {kap.size}")
    if not np.allclose(kap, kap[g.negation], rtol=0, atol=tol * max(1.0, np.abs(kap).max())):
        raise ValidationError("kappa must satisfy kappa(-x) = kappa(x)")
    re, im = _backend.character_analysis(kap, g.moduli)
    scale = max(1.0, float(np.abs(kap).max()))
    if np.abs(im).max() > tol * scale:
        raise ValidationError("coefficients have a non-negligible imaginary part")
    neg = np.nonzero(re < -tol * scale)[0]
    if neg.size:
        warnings.warn(f"kappa has {neg.size} negative coefficient(s): not a kernel",
                      stacklevel=2)
    return re


def kappa_from_gram(g: GroupSpec, gram) -> np.ndarray:
    """``kappa(z) = k(0, z)`` read off the first row of a Gram matrix."""
    return np.asarray(gram, dtype=float)[0].copy()


def group_verdict(k: GroupKernel) -> KernelVerdict:
    """Universal iff every coefficient is positive; characteristic iff all
    coefficients except the one of the trivial character are positive."""
    lam = k.coeffs
    top = float(lam.max())
    cut = TAU_EIG * top if top > 0 else 0.0
    zero = np.nonzero(lam <= cut)[0]
    zero_nontrivial = zero[zero != 0]
    universal = "yes" if zero.size == 0 else "no"
    characteristic = "yes" if zero_nontrivial.size == 0 else "no"
    reasons = []
    labels = k.group.labels()
    if zero.size:
        reasons.append("vanishing coefficients at " + "; ".join(f"({labels[i]})" for i in zero))
    if universal == "no" and characteristic == "yes":
        reasons.append("only the trivial character has a vanishing coefficient")
    E = real_onb(k.group) if zero_nontrivial.size else None
    witnesses = tuple(E[i] / k.group.order for i in zero_nontrivial)
    return KernelVerdict(characteristic, universal, universal, witnesses, tuple(reasons))


def validate_z2_invariance(gram) -> bool:
    """Check ``k(0,1) = k(1,0)`` and ``k(0,0) = k(1,1) >= |k(0,1)|`` for a kernel on Z2."""
    K = np.asarray(gram, dtype=float)
    if K.shape != (2, 2):
        raise ValidationError("expected a 2x2 matrix")
    return bool(K[0, 1] == K[1, 0] and K[0, 0] == K[1, 1] and K[0, 0] >= abs(K[0, 1]))


def z2_verdict_from_gram(gram) -> KernelVerdict:
    """Closed-form decision for a translation-invariant kernel on Z2."""
    K = np.asarray(gram, dtype=float)
    if not validate_z2_invariance(K):
        raise ValidationError("not a translation-invariant kernel on Z2")
    char = "yes" if K[0, 0] != K[0, 1] else "no"
    univ = "yes" if K[0, 0] != K[0, 1] and K[0, 0] != -K[0, 1] else "no"
    return KernelVerdict(char, univ, univ)


def product_group_kernel(kC: GroupKernel, kD: GroupKernel) -> GroupKernel:
    """Product kernel ``k_C * k_D`` on ``G x H`` with coefficients ``lambda_i * lambda_w``."""
    g = GroupSpec(kC.group.moduli + kD.group.moduli)
    lam = np.outer(kC.coeffs, kD.coeffs).ravel()
    lam.setflags(write=False)
    ti = kC.translation_invariant and kD.translation_invariant
    kappa = None
    if ti:
        kappa = np.outer(kC.kappa, kD.kappa).ravel()
        kappa.setflags(write=False)
    return GroupKernel(g, lam, kappa, ti)


def group_mercer_expansion(k: GroupKernel) -> MercerExpansion:
    """Mercer expansion with the exact eigenfunctions ``e_i*`` under Haar measure.

    Entries are sorted by decreasing coefficient (stable); ``source_index``
    maps each position back to its character index.
    """
    E = real_onb(k.group)
    order = np.argsort(-k.coeffs, kind="stable")
    i0 = int(np.nonzero(order == 0)[0][0])
    return MercerExpansion(k.group.space, k.coeffs[order], E[order], i0, order)
