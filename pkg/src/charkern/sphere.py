"""Isotropic kernels on spheres ``S^d``.

Covers Gegenbauer evaluation, Schoenberg coefficient analysis and verdicts,
Funk-Hecke coefficients of ``<x, y>^n``, explicit real harmonic bases for
``d in {1, 2}``, quadrature grids, and the zonal embedding of the densities
``p_{n,a}(x) = 1 + a C_n(<v0, x>) / C_n(1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np
from scipy.special import gammaln, sph_harm_y

from . import _backend
from .exceptions import PreconditionError, ValidationError
from .kernel import TAU_EIG, KernelSpec, KernelVerdict
from .measure import DiscreteSpace, Density
from .quadrature import integrate

Tail = Literal["zero", "positive", "positive-even", "positive-odd", "unknown"]
TAILS = ("zero", "positive", "positive-even", "positive-odd", "unknown")
PSI_CLASSES = ("psi-d+2", "psi-d+1-plus", "psi-infinity")


# ---------------------------------------------------------------- Gegenbauer

def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValidationError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer(n: int, lam: float, t):
    """``C_n^lam(t)``; for ``lam == 0`` the convention ``C_n^0(cos th) = cos(n th)``."""
    if n < 0 or lam < 0:
        raise ValidationError("need n >= 0 and lam >= 0")
    tt = _check_t(t)
    out = _backend.gegenbauer_table(int(n), float(lam), tt.ravel())[n].reshape(tt.shape)
    return float(out) if out.ndim == 0 else out


def gegenbauer_table(n_max: int, lam: float, t) -> np.ndarray:
    """All ``C_0 .. C_{n_max}`` at ``t``; shape ``(n_max + 1,) + t.shape``."""
    tt = _check_t(t)
    tab = _backend.gegenbauer_table(int(n_max), float(lam), tt.ravel())
    return tab.reshape((n_max + 1,) + tt.shape)


def gegenbauer_at_one(n: int, lam: float) -> float:
    if lam == 0:
        return 1.0
    return math.exp(gammaln(n + 2 * lam) - gammaln(n + 1) - gammaln(2 * lam))


def normalized_table(n_max: int, d: int, t) -> np.ndarray:
    """``C_n^{(d-1)/2}(t) / C_n^{(d-1)/2}(1)`` for ``n <= n_max``, clipped to ``[-1, 1]``."""
    lam = 0.5 * (d - 1)
    tab = gegenbauer_table(n_max, lam, t)
    one = np.array([gegenbauer_at_one(n, lam) for n in range(n_max + 1)])
    tab = tab / one.reshape((-1,) + (1,) * (tab.ndim - 1))
    return np.clip(tab, -1.0, 1.0)


def dim_harmonics(d: int, n: int) -> int:
    """Dimension ``N(d, n)`` of degree-``n`` spherical harmonics on ``S^d``."""
    if d < 1 or n < 0:
        raise ValidationError("need d >= 1 and n >= 0")
    second = math.comb(n + d - 2, n - 2) if n >= 2 else 0
    return math.comb(n + d, n) - second


# --------------------------------------------------------- Schoenberg kernels

@dataclass(frozen=True, eq=False)
class SchoenbergKernel:
    """Isotropic kernel ``psi(theta)`` on ``S^d`` given by its Schoenberg sequence.

    ``kind="d"``: ``psi = sum_n b_n C_n(cos th) / C_n(1)`` with
    ``C_n = C_n^{(d-1)/2}``. ``kind="infinity"``: ``psi = sum_n b_n cos(th)^n``.
    ``tail`` describes the coefficients beyond ``len(b) - 1``.
    """

    d: int
    b: np.ndarray
    tail: Tail = "unknown"
    kind: Literal["d", "infinity"] = "d"
    n0: int | None = None
    psi: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        b = np.array(self.b, dtype=float).ravel()
        if self.d < 1:
            raise ValidationError("sphere dimension must be >= 1")
        if np.any(b < 0):
            raise ValidationError("Schoenberg coefficients must be nonnegative")
        if self.tail not in TAILS:
            raise ValidationError(f"unknown tail descriptor {self.tail!r}")
        if self.kind not in ("d", "infinity"):
            raise ValidationError(f"unknown kind {self.kind!r}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def n_max(self) -> int:
        return self.b.size - 1

    def __call__(self, theta):
        """Synthesize ``psi(theta)`` from the (truncated) coefficients."""
        t = np.cos(np.asarray(theta, dtype=float))
        if self.kind == "infinity":
            return np.polynomial.polynomial.polyval(t, self.b)
        tab = normalized_table(self.n_max, self.d, t)
        return np.tensordot(self.b, tab, axes=1)

    def to_dict(self) -> dict:
        d = {"d": self.d, "b": self.b.tolist(), "tail": self.tail, "kind": self.kind}
        if self.n0 is not None:
            d["n0"] = self.n0
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SchoenbergKernel":
        return cls(int(d["d"]), d["b"], d.get("tail", "unknown"), d.get("kind", "d"), d.get("n0"))


def schoenberg_coeffs(psi: Callable, d: int, n_max: int, *, tail: Tail = "unknown",
                      tol: float = 1e-10) -> SchoenbergKernel:
    """Project ``psi`` onto normalized Gegenbauer polynomials.

    ``b_n = C_n(1) <psi o arccos, C_n> / <C_n, C_n>`` in
    ``L2([-1, 1], (1 - t^2)^{(d-2)/2} dt)``, evaluated after the substitution
    ``t = cos(theta)`` so the weight becomes ``sin(theta)^{d-1}``. The
    normalization is the one for which synthesis followed by analysis is the
    identity on coefficient sequences.
    """
    lam = 0.5 * (d - 1)

    def integrand(theta):
        t = np.cos(theta)
        tab = gegenbauer_table(n_max, lam, t)
        w = np.sin(theta) ** (d - 1)
        vals = np.asarray(psi(theta), dtype=float)
        return np.concatenate([tab * vals * w, tab**2 * w])

    res = integrate(integrand, 0.0, np.pi, tol=tol)
    proj, norms = res[: n_max + 1], res[n_max + 1:]
    one = np.array([gegenbauer_at_one(n, lam) for n in range(n_max + 1)])
    b = one * proj / norms
    # quadrature noise on exactly-zero coefficients must not flip the sign
    b = np.where(np.abs(b) <= tol * max(1.0, np.abs(b).max()), 0.0, b)
    if np.any(b < 0):
        raise ValidationError(f"psi has negative {d}-Schoenberg coefficients: not positive definite on S^{d}")
    return SchoenbergKernel(d, b, tail, "d", psi=psi)


def schoenberg_power_coeffs(psi: Callable, n_max: int, *, tail: Tail = "unknown",
                            tol: float = 1e-10, noise: float = 1e-13) -> SchoenbergKernel:
    """Power-basis coefficients ``psi(theta) = sum_n b_n cos(theta)^n``.

    Chebyshev coefficients are obtained from the ``d = 1`` projection, cut
    where they reach the quadrature noise floor, and converted to monomials.
    """
    cheb_max = max(n_max, 64)

    def integrand(theta):
        tab = gegenbauer_table(cheb_max, 0.0, np.cos(theta))
        return tab * np.asarray(psi(theta), dtype=float)

    res = integrate(integrand, 0.0, np.pi, tol=tol)
    c = res / np.where(np.arange(cheb_max + 1) == 0, np.pi, np.pi / 2)
    small = np.abs(c) <= noise * np.abs(c).max()
    cut = int(np.argmax(small)) if small.any() else cheb_max + 1
    poly = np.polynomial.chebyshev.cheb2poly(c[:max(cut, 1)])
    b = np.zeros(n_max + 1)
    b[: min(n_max + 1, poly.size)] = poly[: n_max + 1]
    b = np.where(np.abs(b) <= tol * max(1.0, np.abs(b).max()), 0.0, b)
    if np.any(b < 0):
        raise ValidationError("psi has negative power-series coefficients: not in Psi_infinity")
    return SchoenbergKernel(1, b, tail, "infinity", psi=psi)


def _prefix_positive(b: np.ndarray, start: int, parity: int | None = None) -> bool:
    top = b.max() if b.size else 0.0
    cut = TAU_EIG * top if top > 0 else 0.0
    idx = np.arange(b.size)
    sel = idx >= start
    if parity is not None:
        sel &= idx % 2 == parity
    return bool(np.all(b[sel] > cut))


def _all_positive_from(sk: SchoenbergKernel, start: int):
    """Decide ``b_n > 0 for all n >= start`` from prefix plus tail; returns (decision, reason)."""
    if not _prefix_positive(sk.b, start):
        bad = [n for n in range(start, sk.b.size) if not _prefix_positive(sk.b[: n + 1], n)]
        return "no", f"b_{bad[0]} vanishes"
    if sk.tail == "positive":
        return "yes", f"b_n > 0 for {start} <= n <= {sk.n_max} and positive tail"
    if sk.tail == "unknown":
        return "unknown", "tail unknown: cannot decide b_n > 0 for all n"
    return "no", f"tail '{sk.tail}' has vanishing coefficients beyond n = {sk.n_max}"


def condition_b(sk: SchoenbergKernel):
    """Infinitely many positive coefficients at even and at odd indices."""
    if sk.tail == "positive":
        return "yes"
    if sk.tail == "unknown":
        return "unknown"
    return "no"


def sphere_verdict(sk: SchoenbergKernel, psi_class: str | None = None) -> KernelVerdict:
    """Universal / characteristic / strictly positive definite decision for an isotropic kernel.

    ``psi_class`` optionally declares membership in ``Psi_{d+2}``
    (``"psi-d+2"``), ``Psi_{d+1}^+`` (``"psi-d+1-plus"``) or ``Psi_inf``
    (``"psi-infinity"``); membership itself is never inferred.
    """
    if psi_class is not None and psi_class not in PSI_CLASSES:
        raise ValidationError(f"unknown class declaration {psi_class!r}")
    reasons = []
    if sk.kind == "infinity" or psi_class == "psi-infinity":
        cb = condition_b(sk)
        reasons.append(f"Psi_infinity: characteristic = universal = strictly PD = condition b ({cb})")
        if sk.kind == "infinity" and cb == "no":
            reasons.append("embedding is constant on a family of p_{n,a} densities")
        return KernelVerdict(cb, cb, cb, (), tuple(reasons), strictly_pd=cb)

    univ, r_u = _all_positive_from(sk, 0)
    char, r_c = _all_positive_from(sk, 1)
    reasons += [f"universal: {r_u}", f"characteristic: {r_c}"]

    cb = condition_b(sk)
    if sk.d >= 2:
        spd = cb
        reasons.append(f"strictly PD iff condition b ({cb})")
    elif cb == "no":
        spd = "no"
        reasons.append("d = 1: condition b fails, so not strictly PD")
    else:
        n0 = sk.n0
        if sk.tail == "positive" and _prefix_positive(sk.b, n0 if n0 is not None else sk.n_max + 1):
            spd = "yes"
            reasons.append("d = 1: b_{n,1} > 0 for all large n (sufficient)")
        else:
            spd = "unknown"
            reasons.append("d = 1: condition b is only necessary; undecided")

    if psi_class == "psi-d+1-plus":
        # membership forces every coefficient to be positive
        if univ == "no":
            return KernelVerdict("unknown", "unknown", "unknown", (),
                                 tuple(reasons + ["declared Psi_{d+1}^+ contradicts a vanishing coefficient"]),
                                 strictly_pd="unknown")
        reasons.append("Psi_{d+1}^+ declared: b_{n,d} > 0 for all n")
        return KernelVerdict("yes", "yes", "yes", (), tuple(reasons), strictly_pd="yes")
    if psi_class == "psi-d+2":
        known = {v for v in (univ, char, spd) if v != "unknown"}
        if len(known) > 1:
            return KernelVerdict("unknown", "unknown", "unknown", (),
                                 tuple(reasons + ["declared Psi_{d+2} is inconsistent with the coefficients"]),
                                 strictly_pd="unknown")
        v = known.pop() if known else "unknown"
        reasons.append("Psi_{d+2} declared: characteristic, universal and strictly PD coincide")
        return KernelVerdict(v, v, v, (), tuple(reasons), strictly_pd=v)
    return KernelVerdict(char, univ, univ, (), tuple(reasons), strictly_pd=spd)


# ---------------------------------------------------------------- Funk-Hecke

def _fh_prefactor(d: int) -> float:
    return math.exp(gammaln((d + 1) / 2) - gammaln(d / 2)) / math.sqrt(math.pi)


def funk_hecke_lambda(k: int, n: int, d: int, *, tol: float = 1e-12) -> float:
    """Coefficient ``lambda_k^n`` of ``<x, y>^n`` against degree-``k`` harmonics, by quadrature."""
    if k > n or (n - k) % 2:
        return 0.0
    lam = 0.5 * (d - 1)

    def f(theta):
        t = np.cos(theta)
        return t**n * gegenbauer_table(k, lam, t)[k] * np.sin(theta) ** (d - 1)

    val = float(integrate(f, 0.0, np.pi, tol=tol))
    return _fh_prefactor(d) * val / gegenbauer_at_one(k, lam)


def funk_hecke_closed(k: int, n: int, d: int) -> float:
    """Closed form of :func:`funk_hecke_lambda` (Gegenbauer moment formula)."""
    if k > n or (n - k) % 2:
        return 0.0
    if d == 1:
        return math.comb(n, (n - k) // 2) / 2.0**n
    lam = 0.5 * (d - 1)
    log_int = (math.log(math.pi) + (2 - d - n) * math.log(2.0) + gammaln(k + d - 1)
               + gammaln(n + 1) - gammaln(k + 1) - gammaln(lam)
               - gammaln((n - k + 2) / 2) - gammaln((k + d + n + 1) / 2))
    return _fh_prefactor(d) * math.exp(log_int) / gegenbauer_at_one(k, lam)


def funk_hecke_mellin(k: int, n: int, d: int) -> float:
    """Mellin-transform expression lacking the Funk-Hecke normalization; diagnostics only (d >= 2)."""
    if k > n or (n - k) % 2:
        return 0.0
    if d < 2:
        raise ValidationError("Mellin expression involves Gamma((d-1)/2); needs d >= 2")
    return math.exp(math.log(math.pi) + (d - n - 1) * math.log(2.0) + gammaln(k + d - 1)
                    + gammaln(n + 1) - gammaln(k + 1) - gammaln((d - 1) / 2)
                    - gammaln((k + d + n) / 2) - gammaln((n - k + 2) / 2))


# ------------------------------------------------------- grids and harmonics

@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes on ``S^d`` with weights summing to one."""

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError("grid weights must sum to 1")
        for a in (self.nodes, self.weights):
            a.setflags(write=False)

    def __len__(self):
        return self.weights.size

    @cached_property
    def space(self) -> DiscreteSpace:
        """The nodes as a finite space weighted by the quadrature weights."""
        return DiscreteSpace([f"node{i}" for i in range(len(self))], self.weights)

    def integrate(self, values) -> np.ndarray:
        return np.asarray(values, dtype=float) @ self.weights


def sphere_grid(d: int, degree: int) -> SphereGrid:
    """Grid integrating every polynomial of total degree ``<= degree`` exactly.

    ``S^1``: ``degree + 1`` equispaced angles. ``S^2``: Gauss-Legendre in the
    polar cosine times equispaced azimuths.
    """
    if d == 1:
        m = degree + 1
        phi = 2.0 * np.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(phi), np.sin(phi)])
        return SphereGrid(1, nodes, np.full(m, 1.0 / m), degree)
    if d == 2:
        nt = degree // 2 + 1
        nphi = degree + 1
        t, wt = np.polynomial.legendre.leggauss(nt)
        phi = 2.0 * np.pi * np.arange(nphi) / nphi
        T, PH = np.meshgrid(t, phi, indexing="ij")
        s = np.sqrt(1.0 - T**2)
        nodes = np.column_stack([(s * np.cos(PH)).ravel(), (s * np.sin(PH)).ravel(), T.ravel()])
        w = np.repeat(wt / 2.0, nphi) / nphi
        return SphereGrid(2, nodes, w / w.sum(), degree)
    raise ValidationError("explicit grids exist only for d in {1, 2}")


def harmonic_block(d: int, n: int, x) -> np.ndarray:
    """Real ``L2(sigma)``-orthonormal degree-``n`` harmonics at points ``x``; shape ``(N(d,n), M)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if d == 1:
        phi = np.arctan2(x[:, 1], x[:, 0])
        if n == 0:
            return np.ones((1, phi.size))
        r2 = math.sqrt(2.0)
        return np.stack([r2 * np.cos(n * phi), r2 * np.sin(n * phi)])
    if d == 2:
        theta = np.arccos(np.clip(x[:, 2], -1.0, 1.0))
        phi = np.arctan2(x[:, 1], x[:, 0])
        scale = math.sqrt(4.0 * math.pi)
        rows = []
        for m in range(-n, n + 1):
            Y = sph_harm_y(n, abs(m), theta, phi)
            if m == 0:
                rows.append(scale * Y.real)
            elif m > 0:
                rows.append(scale * math.sqrt(2.0) * (-1) ** m * Y.real)
            else:
                rows.append(scale * math.sqrt(2.0) * (-1) ** m * Y.imag)
        return np.stack(rows)
    raise ValidationError("explicit harmonic bases exist only for d in {1, 2}")


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Per-degree coefficient blocks ``c_{k, j}``, ``j = 1 .. N(d, k)``."""

    d: int
    blocks: tuple

    def __post_init__(self):
        for k, blk in enumerate(self.blocks):
            if np.asarray(blk).shape != (dim_harmonics(self.d, k),):
                raise ValidationError(f"block {k} must have length N({self.d},{k})")

    @property
    def degree(self) -> int:
        return len(self.blocks) - 1

    def block_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(b) for b in self.blocks])

    def to_dict(self) -> dict:
        return {"d": self.d, "blocks": [np.asarray(b).tolist() for b in self.blocks]}


def harmonic_coeffs(grid: SphereGrid, values, n_max: int) -> HarmonicCoeffs:
    """``c_{k,j} = int e_{k,j} p dsigma`` by grid quadrature."""
    vals = np.asarray(values, dtype=float)
    blocks = tuple(harmonic_block(grid.d, k, grid.nodes) @ (vals * grid.weights)
                   for k in range(n_max + 1))
    return HarmonicCoeffs(grid.d, blocks)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    r = np.linalg.norm(v)
    if r == 0:
        raise ValidationError("v0 must be nonzero")
    return v / r


@dataclass(frozen=True, eq=False)
class PnaDensity:
    n: int
    a: float
    v0: np.ndarray
    values: np.ndarray
    density: Density
    coeffs: HarmonicCoeffs


def pna_values(d: int, n: int, a: float, v0, x) -> np.ndarray:
    v0 = _unit(v0)
    t = np.clip(np.atleast_2d(x) @ v0, -1.0, 1.0)
    return 1.0 + a * normalized_table(n, d, t)[n]


def pna_coeffs(d: int, n: int, a: float, v0, n_max: int | None = None) -> HarmonicCoeffs:
    """Closed-form blocks: ``c_0 = 1``, ``c_n = a e_n(v0) / N(d, n)``, all others zero."""
    n_max = n if n_max is None else n_max
    v0 = _unit(v0)
    blocks = []
    for k in range(n_max + 1):
        blk = np.zeros(dim_harmonics(d, k))
        if k == 0:
            blk[0] = 1.0
        if k == n:
            blk = blk + a * harmonic_block(d, k, v0[None, :])[:, 0] / dim_harmonics(d, k)
        blocks.append(blk)
    return HarmonicCoeffs(d, tuple(blocks))


def pna_density(grid: SphereGrid, n: int, a: float, v0, n_max: int | None = None) -> PnaDensity:
    """The density ``p_{n,a}`` on a grid, with its closed-form harmonic coefficients.

    ``v0`` is a unit vector or the integer index of a grid node.
    """
    if not (-1.0 <= a <= 1.0) or a == 0.0:
        raise ValidationError("a must lie in [-1, 1] without 0")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if isinstance(v0, (int, np.integer)):
        v0 = grid.nodes[int(v0)]
    v0 = _unit(v0)
    vals = pna_values(grid.d, n, a, v0, grid.nodes)
    dens = Density(grid.space, vals)
    return PnaDensity(n, a, v0, vals, dens, pna_coeffs(grid.d, n, a, v0, n_max))


# ---------------------------------------------------------- zonal embedding

def zonal_weights(sk: SchoenbergKernel, k_max: int) -> np.ndarray:
    """Mercer weights ``z_k`` of the kernel on degree-``k`` harmonics.

    ``d``-sequences: ``z_k = b_{k,d} / N(d, k)``. Power sequences:
    ``z_k = sum_{n >= k} b_n lambda_k^n`` over the stored coefficients.
    """
    z = np.zeros(k_max + 1)
    if sk.kind == "d":
        m = min(k_max, sk.n_max)
        z[: m + 1] = [sk.b[k] / dim_harmonics(sk.d, k) for k in range(m + 1)]
        return z
    for k in range(k_max + 1):
        z[k] = sum(sk.b[n] * funk_hecke_closed(k, n, sk.d)
                   for n in range(k, sk.n_max + 1) if sk.b[n] != 0.0)
    return z


def zonal_embed(sk: SchoenbergKernel, p: HarmonicCoeffs, *, d: int | None = None) -> HarmonicCoeffs:
    """Harmonic coefficients of ``x -> int k(x, y) p(y) dsigma(y)``: block ``k`` is ``z_k c_k(p)``."""
    d = p.d if d is None else d
    if sk.kind == "d" and sk.d != d:
        raise ValidationError("kernel and coefficients refer to different spheres")
    if sk.kind == "infinity" and sk.d != d:
        sk = SchoenbergKernel(d, sk.b, sk.tail, "infinity", sk.n0)
    z = zonal_weights(sk, p.degree)
    return HarmonicCoeffs(d, tuple(z[k] * np.asarray(b) for k, b in enumerate(p.blocks)))


def embedding_is_constant(emb: HarmonicCoeffs, tol: float = 1e-10) -> bool:
    return bool(np.all(emb.block_norms()[1:] <= tol))


def pna_mmd_sq(sk: SchoenbergKernel, n: int, a: float, v0) -> float:
    """Squared MMD between ``p_{n,a} dsigma`` and ``sigma`` from the harmonic blocks."""
    z = zonal_weights(sk, n)
    e = harmonic_block(sk.d, n, _unit(v0)[None, :])[:, 0]
    N = dim_harmonics(sk.d, n)
    return float(z[n] * a**2 / N**2 * (e @ e))


def addition_formula_check(d: int, n: int, grid: SphereGrid) -> float:
    """Max over grid pairs of ``|C_n(<x,y>)/C_n(1) - (1/N) sum_j e_{n,j}(x) e_{n,j}(y)|``."""
    X = grid.nodes
    G = np.clip(X @ X.T, -1.0, 1.0)
    lhs = normalized_table(n, d, G)[n]
    E = harmonic_block(d, n, X)
    rhs = E.T @ E / dim_harmonics(d, n)
    return float(np.abs(lhs - rhs).max())


def isotropic_kernel_spec(psi: Callable, grid: SphereGrid) -> KernelSpec:
    """Gram of ``psi(theta(x, y))`` on the grid nodes, as a kernel on a finite space."""
    G = np.clip(grid.nodes @ grid.nodes.T, -1.0, 1.0)
    K = np.asarray(psi(np.arccos(G)), dtype=float)
    return KernelSpec(grid.space, K, symmetrize=True)
