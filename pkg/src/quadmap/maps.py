"""The map H(x, y, z) = (xy + az, x^2 + by, x), its inverse and lifts.

Affine points are triples of :class:`~quadmap.numeric.ComplexExt`. Projective
points live in C^4 and are renormalized to unit sup-norm after every lifted
step, with the discarded log-scale accumulated separately.
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import IndeterminacyHit
from .numeric import ONE, ZERO, ComplexExt, as_ext

FORWARD = "forward"
BACKWARD = "backward"
DIRECTIONS = (FORWARD, BACKWARD)

# log-magnitudes past this are no longer finite doubles downstream
_LOG_LIMIT = 1e300


def check_direction(direction: str) -> str:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


def degree(direction: str) -> int:
    """Algebraic degree of H (2) or of its inverse (3)."""
    return 2 if check_direction(direction) == FORWARD else 3


@dataclass(frozen=True)
class Params:
    """Coefficients of H. Both must be nonzero for H to be an automorphism."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.a == 0 or self.b == 0:
            raise ValueError("H is an automorphism only when a*b != 0; "
                             "use quadmap.model2d for a = 0")

    @cached_property
    def a_ext(self) -> ComplexExt:
        return as_ext(self.a)

    @cached_property
    def b_ext(self) -> ComplexExt:
        return as_ext(self.b)


class Point3(NamedTuple):
    x: ComplexExt
    y: ComplexExt
    z: ComplexExt

    @classmethod
    def of(cls, x, y, z) -> "Point3":
        return cls(as_ext(x), as_ext(y), as_ext(z))

    def to_complex(self) -> tuple[complex, complex, complex]:
        return (self.x.to_complex(), self.y.to_complex(), self.z.to_complex())

    def log_abs(self) -> tuple[float, float, float]:
        return (self.x.log_abs(), self.y.log_abs(), self.z.log_abs())

    def log_norm(self) -> float:
        """ln of the sup-norm."""
        return max(self.x.log_abs(), self.y.log_abs(), self.z.log_abs())


def point(x, y, z) -> Point3:
    return Point3.of(x, y, z)


def forward_step(p: Params, w: Point3) -> Point3:
    x, y, z = w
    return Point3(x * y + p.a_ext * z, x.square() + p.b_ext * y, x)


def inverse_step(p: Params, w: Point3) -> Point3:
    x, y, z = w
    y1 = (y - z.square()) / p.b_ext
    return Point3(z, y1, (x - z * y1) / p.a_ext)


def step(p: Params, w: Point3, direction: str) -> Point3:
    if direction == FORWARD:
        return forward_step(p, w)
    return inverse_step(p, w)


# --------------------------------------------------------------------------
# projective lifts


@dataclass(frozen=True)
class ProjPoint:
    """Unit sup-norm representative of a point of P^3 with its log-scale.

    ``scale`` is ``d**-k * ln||L^k(v0)||`` where ``v0`` is the vector the
    point was built from and ``k = steps`` lifted steps of degree ``d`` have
    been applied, so it converges to the lifted Green function.
    """

    v: tuple[ComplexExt, ComplexExt, ComplexExt, ComplexExt]
    scale: float = 0.0
    steps: int = 0
    last_log_norm: float = 0.0

    @classmethod
    def from_vector(cls, coords) -> "ProjPoint":
        v = tuple(as_ext(c) for c in coords)
        if len(v) != 4:
            raise ValueError("projective points need four coordinates")
        v, log_c = _normalize(v)
        return cls(v, log_c, 0, log_c)

    @classmethod
    def from_affine(cls, w: Point3) -> "ProjPoint":
        return cls.from_vector((w.x, w.y, w.z, ONE))

    def to_complex(self) -> tuple[complex, ...]:
        return tuple(c.to_complex() for c in self.v)

    def is_affine(self) -> bool:
        return not self.v[3].is_zero()

    def affine(self) -> Point3:
        x, y, z, t = self.v
        return Point3(x / t, y / t, z / t)


def sup_log_norm(coords) -> float:
    return max(c.log_abs() for c in coords)


def _normalize(v):
    log_c = sup_log_norm(v)
    if log_c == -math.inf:
        raise IndeterminacyHit("zero vector has no projective class")
    # divide by the modulus of the largest coordinate
    big = max(v, key=lambda c: (c.e, abs(c.m)) if not c.is_zero() else (-math.inf, 0))
    inv = ComplexExt(1.0 / abs(big.m), -big.e)
    return tuple(c * inv for c in v), log_c


def lift_forward(p: Params, v):
    """Degree-2 homogeneous lift [xy+azt : x^2+byt : xt : t^2]."""
    X, Y, Z, T = v
    return (X * Y + p.a_ext * Z * T, X.square() + p.b_ext * Y * T, X * T, T.square())


def lift_backward(p: Params, v):
    """Degree-3 homogenization of H^-1, multiplied through by ab."""
    X, Y, Z, T = v
    a, b = p.a_ext, p.b_ext
    ab = a * b
    T2 = T.square()
    ZT2 = Z * T2
    return (ab * ZT2,
            a * T * (Y * T - Z.square()),
            b * X * T2 - Z * Y * T + Z.square() * Z,
            ab * T2 * T)


def lift_step(p: Params, v: ProjPoint, direction: str = FORWARD) -> ProjPoint:
    d = degree(direction)
    image = lift_forward(p, v.v) if direction == FORWARD else lift_backward(p, v.v)
    if all(c.is_zero() for c in image):
        locus = "I+ = {t=x=0}" if direction == FORWARD else "I- = {t=z=0}"
        raise IndeterminacyHit(f"lifted image is zero: input lies on {locus}")
    nv, log_c = _normalize(image)
    k = v.steps
    return ProjPoint(nv, v.scale + log_c / d ** (k + 1), k + 1, log_c)


def lift_power_log_norm(p: Params, coords, n: int, direction: str = FORWARD) -> float:
    """``ln||L^n(v)||`` by direct unnormalized iteration (no renormalization)."""
    v = tuple(as_ext(c) for c in coords)
    lift = lift_forward if direction == FORWARD else lift_backward
    for _ in range(n):
        v = lift(p, v)
    return sup_log_norm(v)


# --------------------------------------------------------------------------
# orbits

COMPLETED = "completed"
INDETERMINACY_HIT = "indeterminacy-hit"
ZERO_DIVISOR = "zero-divisor"
OVERFLOW = "overflow"


@dataclass
class OrbitSeries:
    """Record of an orbit segment.

    ``logmags[k]`` holds ``(ln|x_k|, ln|y_k|, ln|z_k|, ln||w_k||)`` for
    ``k = 0 .. steps``; ``checkpoints`` holds ``(k, w_k)`` every ``stride``
    steps plus the final point.
    """

    direction: str
    stride: int
    checkpoints: list = field(default_factory=list)
    logmags: list = field(default_factory=list)
    termination: str = COMPLETED

    @property
    def steps(self) -> int:
        return len(self.logmags) - 1

    @property
    def final(self) -> Point3:
        return self.checkpoints[-1][1]

    def logmag_array(self) -> np.ndarray:
        return np.array(self.logmags, dtype=float).reshape(-1, 4)

    def log_norms(self) -> np.ndarray:
        return self.logmag_array()[:, 3]


def _logmag_row(w: Point3):
    lx, ly, lz = w.log_abs()
    return (lx, ly, lz, max(lx, ly, lz))


def iterate(p: Params, w: Point3, n: int, direction: str = FORWARD):
    """Yield ``w_0 = w, w_1, ..., w_n`` along the forward or backward orbit."""
    check_direction(direction)
    yield w
    for _ in range(n):
        w = step(p, w, direction)
        yield w


def orbit(p: Params, w: Point3, n: int, direction: str = FORWARD,
          stride: int = 1) -> OrbitSeries:
    if n < 0:
        raise ValueError("step count must be nonnegative")
    if stride < 1:
        raise ValueError("stride must be positive")
    check_direction(direction)
    series = OrbitSeries(direction, stride)
    series.logmags.append(_logmag_row(w))
    series.checkpoints.append((0, w))
    k = 0
    for k in range(1, n + 1):
        try:
            nxt = step(p, w, direction)
        except ZeroDivisionError:
            series.termination = ZERO_DIVISOR
            k -= 1
            break
        row = _logmag_row(nxt)
        if row[3] > _LOG_LIMIT:
            series.termination = OVERFLOW
            k -= 1
            break
        w = nxt
        series.logmags.append(row)
        if k % stride == 0:
            series.checkpoints.append((k, w))
    if series.checkpoints[-1][0] != k:
        series.checkpoints.append((k, w))
    return series
