"""Finite spaces with reference weights, signed measures and densities.

Every object is immutable: arrays are copied on construction and flagged
read-only, so values can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError, SpaceMismatchError, ValidationError

#: tolerance for ``total mass == 1`` checks on probability measures/densities
TAU_MASS = 1e-12


def _frozen(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """Ordered finite point set with strictly positive reference weights ``nu``."""

    points: tuple
    nu: np.ndarray

    def __init__(self, points: Sequence, nu=None):
        pts = tuple(str(p) for p in points)
        if len(pts) == 0:
            raise ValidationError("a space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValidationError("point labels must be unique")
        w = np.full(len(pts), 1.0 / len(pts)) if nu is None else np.asarray(nu, dtype=float)
        if w.shape != (len(pts),):
            raise ValidationError(f"nu has shape {w.shape}, expected ({len(pts)},)")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("reference weights must be finite and strictly positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "nu", _frozen(w))
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pts)})

    @classmethod
    def uniform(cls, n: int, prefix: str = "") -> "DiscreteSpace":
        return cls([f"{prefix}{i}" for i in range(n)])

    def __len__(self):
        return len(self.points)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise DomainError(f"point {label!r} is not in the space") from None

    def same_as(self, other: "DiscreteSpace") -> bool:
        return self is other or (
            self.points == other.points and np.array_equal(self.nu, other.nu)
        )

    @property
    def is_probability(self) -> bool:
        return abs(self.nu.sum() - 1.0) <= TAU_MASS

    def __eq__(self, other):
        return isinstance(other, DiscreteSpace) and self.same_as(other)

    def __hash__(self):
        return hash((self.points, self.nu.tobytes()))

    def __repr__(self):
        return f"DiscreteSpace(n={len(self)})"

    def to_dict(self) -> dict:
        return {"points": list(self.points), "nu": self.nu.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteSpace":
        return cls(d["points"], d.get("nu"))


def product_space(s1: DiscreteSpace, s2: DiscreteSpace) -> DiscreteSpace:
    """Cartesian product with product reference weights, row-major order."""
    pts = [f"{a}|{b}" for a in s1.points for b in s2.points]
    return DiscreteSpace(pts, np.outer(s1.nu, s2.nu).ravel())


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    space: DiscreteSpace
    mass: np.ndarray

    def __init__(self, space: DiscreteSpace, mass):
        m = np.asarray(mass, dtype=float)
        if m.shape != (len(space),):
            raise ValidationError(f"mass has shape {m.shape}, expected ({len(space)},)")
        if not np.all(np.isfinite(m)):
            raise ValidationError("masses must be finite")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mass", _frozen(m))

    @classmethod
    def dirac(cls, space: DiscreteSpace, label) -> "SignedMeasure":
        m = np.zeros(len(space))
        m[space.index(label)] = 1.0
        return cls(space, m)

    @classmethod
    def zero(cls, space: DiscreteSpace) -> "SignedMeasure":
        return cls(space, np.zeros(len(space)))

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @property
    def is_zero_mass(self) -> bool:
        return abs(self.total_mass) <= TAU_MASS * max(1.0, tv_norm(self))

    @property
    def is_probability(self) -> bool:
        return bool(np.all(self.mass >= 0)) and abs(self.total_mass - 1.0) <= TAU_MASS

    def require_probability(self, name: str = "measure") -> "SignedMeasure":
        if not self.is_probability:
            raise ValidationError(
                f"{name} is not a probability measure (total mass {self.total_mass!r}, "
                f"min mass {self.mass.min()!r})"
            )
        return self

    def _check(self, other: "SignedMeasure"):
        if not self.space.same_as(other.space):
            raise SpaceMismatchError("measures live on different spaces")

    def __add__(self, other):
        self._check(other)
        return SignedMeasure(self.space, self.mass + other.mass)

    def __sub__(self, other):
        self._check(other)
        return SignedMeasure(self.space, self.mass - other.mass)

    def __neg__(self):
        return SignedMeasure(self.space, -self.mass)

    def __mul__(self, c: float):
        return SignedMeasure(self.space, float(c) * self.mass)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SignedMeasure(n={len(self.space)}, total_mass={self.total_mass:.6g})"

    def to_dict(self) -> dict:
        return {**self.space.to_dict(), "mass": self.mass.tolist()}

    @classmethod
    def from_dict(cls, d: dict, space: DiscreteSpace | None = None) -> "SignedMeasure":
        if space is None:
            space = DiscreteSpace.from_dict(d)
        return cls(space, d["mass"])


@dataclass(frozen=True, eq=False)
class Density:
    """A nonnegative ``nu``-density ``h`` with ``sum(h * nu) == 1``."""

    space: DiscreteSpace
    h: np.ndarray

    def __init__(self, space: DiscreteSpace, h):
        v = np.asarray(h, dtype=float)
        if v.shape != (len(space),):
            raise ValidationError(f"density has shape {v.shape}, expected ({len(space)},)")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("a density must be finite and nonnegative")
        total = float(v @ space.nu)
        if abs(total - 1.0) > TAU_MASS:
            raise ValidationError(f"density integrates to {total!r}, not 1")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "h", _frozen(v))

    @classmethod
    def uniform(cls, space: DiscreteSpace) -> "Density":
        return cls(space, np.full(len(space), 1.0 / space.nu.sum()))

    def __repr__(self):
        return f"Density(n={len(self.space)})"


def tv_norm(mu: SignedMeasure) -> float:
    """Total variation norm ``sum_x |mu({x})|``."""
    return float(np.abs(mu.mass).sum())


def hahn_jordan(mu: SignedMeasure) -> tuple[SignedMeasure, SignedMeasure]:
    """Split ``mu`` into nonnegative parts with disjoint supports, ``mu = pos - neg``."""
    m = mu.mass
    pos = np.where(m > 0, m, 0.0)
    neg = np.where(m < 0, -m, 0.0)
    return SignedMeasure(mu.space, pos), SignedMeasure(mu.space, neg)


def mix(alpha: float, P: SignedMeasure, Q: SignedMeasure) -> SignedMeasure:
    """Return ``(1 - alpha) * P + alpha * Q``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"mixing weight {alpha!r} outside [0, 1]")
    P._check(Q)
    if alpha == 0.0:
        return P
    if alpha == 1.0:
        return Q
    return SignedMeasure(P.space, (1.0 - alpha) * P.mass + alpha * Q.mass)


def density_to_measure(h: Density) -> SignedMeasure:
    return SignedMeasure(h.space, h.h * h.space.nu)


def measure_to_density(mu: SignedMeasure, space: DiscreteSpace | None = None) -> Density:
    space = mu.space if space is None else space
    if not space.same_as(mu.space):
        raise SpaceMismatchError("measure and target space differ")
    return Density(space, mu.mass / space.nu)


def product_measure(mu1: SignedMeasure, mu2: SignedMeasure) -> SignedMeasure:
    space = product_space(mu1.space, mu2.space)
    return SignedMeasure(space, np.outer(mu1.mass, mu2.mass).ravel())


def zero_mass_part(mu: SignedMeasure, P: SignedMeasure) -> SignedMeasure:
    """Component of ``mu`` in M0 along the split ``M = R P (+) M0``."""
    P.require_probability("P")
    return mu - mu.total_mass * P
