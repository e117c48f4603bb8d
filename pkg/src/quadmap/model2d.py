"""The a = 0 reduction H(x, y) = (xy, x^2 + by) on C^2.

For b^4 = 1 the horizontal lines y = +-sqrt(-b) are permuted by the second
iterate, which acts on them as ``x -> s x^3 - b^2 x``. Orbits on these lines
grow like ``|x|^(3^n)`` every two steps, the fastest rate allowed on K+.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

from .numeric import ComplexExt, as_ext

ROOT_TOL = 1e-12
_UNIT_ROOTS = (1 + 0j, -1 + 0j, 1j, -1j)


class Point2(NamedTuple):
    x: ComplexExt
    y: ComplexExt

    @classmethod
    def of(cls, x, y) -> "Point2":
        return cls(as_ext(x), as_ext(y))

    def to_complex(self) -> tuple[complex, complex]:
        return (self.x.to_complex(), self.y.to_complex())


def step2d(b: complex, w: Point2) -> Point2:
    if b == 0:
        raise ValueError("b must be nonzero")
    x, y = w
    return Point2(x * y, x.square() + as_ext(b) * y)


def step2_closed(b: complex, w: Point2) -> Point2:
    """H^2 via x2 = xy(x^2 + by), y2 = x^2(y^2 + b) + b^2 y."""
    if b == 0:
        raise ValueError("b must be nonzero")
    x, y = w
    be = as_ext(b)
    x2 = x.square()
    return Point2(x * y * (x2 + be * y), x2 * (y.square() + be) + be.square() * y)


def snap_unit_root(b: complex) -> complex | None:
    """The exact fourth root of unity within ``ROOT_TOL`` of ``b``, if any."""
    for r in _UNIT_ROOTS:
        if abs(b - r) <= ROOT_TOL:
            return r
    return None


@dataclass(frozen=True)
class InvariantLineSet:
    """The pair of lines y = s, y = -s (s^2 = -b) permuted by H^2.

    On a line, ``H^2(x, s) = (s x^3 - b^2 x, b^2 s)``: the lines are fixed
    for b = +-1 and swapped for b = +-i.
    """

    b: complex
    lines: tuple[complex, complex]

    @property
    def cubic_coeff(self) -> tuple[complex, complex]:
        return self.lines

    @property
    def linear_coeff(self) -> complex:
        return -self.b ** 2

    def image_line(self, s: complex) -> complex:
        return self.b ** 2 * s

    def step(self, x: ComplexExt, s: complex) -> tuple[ComplexExt, complex]:
        """One application of H^2 restricted to the line y = s."""
        return x.square() * x * as_ext(s) + as_ext(self.linear_coeff) * x, self.image_line(s)


def _exact_sqrt_neg(b: complex) -> complex:
    # principal square roots of -b for b in {1, -1, i, -i}
    table = {
        1 + 0j: 1j,
        -1 + 0j: 1 + 0j,
        1j: cmath.exp(-1j * math.pi / 4),
        -1j: cmath.exp(1j * math.pi / 4),
    }
    return table[b]


def invariant_lines(b: complex) -> InvariantLineSet | None:
    if b == 0:
        raise ValueError("b must be nonzero")
    r = snap_unit_root(complex(b))
    if r is None:
        return None
    s = _exact_sqrt_neg(r)
    return InvariantLineSet(r, (s, -s))


def orbit2d(b: complex, w: Point2, n: int) -> list[Point2]:
    out = [w]
    for _ in range(n):
        w = step2d(b, w)
        out.append(w)
    return out


def sharp_growth_exponent(b: complex, x0: complex, n_pairs: int,
                          line: complex | None = None) -> list[float]:
    """``3^-n ln|x_{2n}|`` for ``n = 0..n_pairs`` along an invariant line.

    The orbit starts at ``(x0, s)`` with ``s`` the principal root of
    ``s^2 = -b`` unless ``line`` picks the other one.
    """
    if abs(x0) <= 1:
        raise ValueError("growth runs need |x0| > 1")
    out = []
    for n, (x, _) in enumerate(_line_pairs(b, x0, n_pairs, line)):
        out.append(x.log_abs() / 3 ** n)
    return out


def _line_pairs(b, x0, n_pairs, line):
    # The lines repel transversally (an offset eta grows like 2|x|^2 eta per
    # H^2), so rounding in s would leave the line within a few steps; the
    # restricted map x -> s x^3 - b^2 x keeps the orbit on it exactly.
    lines = invariant_lines(b)
    if lines is None:
        raise ValueError(f"b = {b!r} is not a fourth root of unity")
    s = lines.lines[0] if line is None else line
    x = as_ext(x0)
    yield x, s
    for _ in range(n_pairs):
        x, s = lines.step(x, s)
        yield x, s


def line_orbit(b: complex, x0: complex, n_pairs: int, line: complex | None = None):
    """Orbit ``w_0 .. w_{2 n_pairs}`` from ``(x0, s)`` on an invariant line.

    Even points come from the restricted second iterate, odd points are one
    application of :func:`step2d` to them.
    """
    out = []
    pairs = list(_line_pairs(b, x0, n_pairs, line))
    b_exact = invariant_lines(b).b
    for k, (x, s) in enumerate(pairs):
        w = Point2(x, as_ext(s))
        out.append(w)
        if k < n_pairs:
            out.append(step2d(b_exact, w))
    return out


def in_v_minus_2d(w: Point2, R: float, eps: float) -> bool:
    """The a = 0 trap ``|xy| > max(R, |x|^(3/2), |y|^(3/2)/eps)``."""
    lx, ly = w.x.log_abs(), w.y.log_abs()
    return lx + ly > max(math.log(R), 1.5 * lx, 1.5 * ly - math.log(eps))
