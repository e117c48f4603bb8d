"""Extended-exponent complex scalars.

A :class:`ComplexExt` stores ``mantissa * 2**exponent`` with ``|mantissa|`` in
``[1, 2)`` and an unbounded Python ``int`` exponent, so orbit coordinates that
grow like ``C**(3**n)`` stay representable long after a double overflows.
"""
from __future__ import annotations

import cmath
import math
from decimal import Context, Decimal, MAX_EMAX, MIN_EMIN

LN2 = math.log(2.0)
MANTISSA_BITS = 53
# exponent gap beyond which the smaller addend cannot change the sum
_ADD_CUTOFF = MANTISSA_BITS + 1

_frexp = math.frexp
_ldexp = math.ldexp
_log = math.log


class ComplexExt:
    """Complex number with a separate integer binary exponent.

    Instances are immutable values. Every constructor path normalizes so that
    zero is ``(0j, 0)`` and any other value has ``1 <= |mantissa| < 2``.
    """

    __slots__ = ("m", "e")

    def __init__(self, mantissa=0j, exponent: int = 0):
        m = complex(mantissa)
        if m == 0:
            self.m = 0j
            self.e = 0
            return
        if not (math.isfinite(m.real) and math.isfinite(m.imag)):
            raise ValueError(f"non-finite mantissa {m!r}")
        # pre-scale so abs() cannot overflow or lose subnormal bits
        _, k0 = _frexp(max(abs(m.real), abs(m.imag)))
        if k0 != 0:
            m = complex(_ldexp(m.real, -k0), _ldexp(m.imag, -k0))
        _, k = _frexp(abs(m))
        if k != 1:
            m = m * _ldexp(1.0, 1 - k)
        self.m = m
        self.e = int(exponent) + k0 + k - 1

    @classmethod
    def _raw(cls, m: complex, e: int) -> "ComplexExt":
        # m already finite and of modest size (product/sum of normalized mantissas)
        obj = object.__new__(cls)
        if m == 0:
            obj.m = 0j
            obj.e = 0
            return obj
        _, k = _frexp(abs(m))
        if k != 1:
            m = m * _ldexp(1.0, 1 - k)
        obj.m = m
        obj.e = e + k - 1
        return obj

    @classmethod
    def from_value(cls, value) -> "ComplexExt":
        if isinstance(value, ComplexExt):
            return value
        return cls(complex(value), 0)

    # -- conversions -----------------------------------------------------
    def to_complex(self) -> complex:
        """Plain complex value; raises ``OverflowError`` outside double range."""
        if self.m == 0:
            return 0j
        return complex(_ldexp(self.m.real, self.e), _ldexp(self.m.imag, self.e))

    __complex__ = to_complex

    def log_abs(self) -> float:
        """Natural log of the modulus, ``-inf`` for zero."""
        if self.m == 0:
            return -math.inf
        return _log(abs(self.m)) + self.e * LN2

    def arg(self) -> float:
        return cmath.phase(self.m)

    def is_zero(self) -> bool:
        return self.m == 0

    def scaled(self, shift: int) -> complex:
        """Return ``self * 2**shift`` as a plain complex (may underflow to 0)."""
        if self.m == 0:
            return 0j
        e = self.e + shift
        if e < -1100:
            return 0j
        return complex(_ldexp(self.m.real, e), _ldexp(self.m.imag, e))

    def to_decimal_strings(self, digits: int = 17) -> tuple[str, str]:
        """Real and imaginary parts as decimal strings with exponent field.

        Exactly rounded for ``|exponent| < 10**6``; beyond that the decimal
        exponent is derived through a high-precision ``log10(2)``.
        """
        if self.m == 0:
            return "0", "0"
        if abs(self.e) < 10**6:
            ctx = Context(prec=digits, Emax=MAX_EMAX, Emin=MIN_EMIN)
            scale = ctx.power(Decimal(2), self.e)
            return (_fmt(ctx.multiply(Decimal(self.m.real), scale)),
                    _fmt(ctx.multiply(Decimal(self.m.imag), scale)))
        ctx = Context(prec=digits + len(str(abs(self.e))) + 8)
        mag = abs(self.m)
        lg = ctx.add(ctx.multiply(Decimal(self.e), ctx.log10(Decimal(2))),
                     ctx.log10(Decimal(mag)))
        k = int(lg.to_integral_value(rounding="ROUND_FLOOR"))
        scale = ctx.power(Decimal(10), ctx.subtract(lg, Decimal(k)))
        out = []
        for part in (self.m.real, self.m.imag):
            if part == 0:
                out.append("0")
                continue
            d = Context(prec=digits).multiply(scale, Decimal(part / mag))
            mant, _, sub = f"{d.normalize():e}".partition("e")
            out.append(f"{mant}e{k + int(sub):+d}")
        return out[0], out[1]

    # -- arithmetic -------------------------------------------------------
    def __mul__(self, other):
        if not isinstance(other, ComplexExt):
            other = ComplexExt.from_value(other)
        return ComplexExt._raw(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, ComplexExt):
            other = ComplexExt.from_value(other)
        if other.m == 0:
            raise ZeroDivisionError("ComplexExt division by zero")
        return ComplexExt._raw(self.m / other.m, self.e - other.e)

    def __rtruediv__(self, other):
        return ComplexExt.from_value(other) / self

    def __add__(self, other):
        if not isinstance(other, ComplexExt):
            other = ComplexExt.from_value(other)
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        gap = self.e - other.e
        if gap >= 0:
            if gap > _ADD_CUTOFF:
                return self
            return ComplexExt._raw(self.m + other.m * _ldexp(1.0, -gap), self.e)
        if -gap > _ADD_CUTOFF:
            return other
        return ComplexExt._raw(other.m + self.m * _ldexp(1.0, gap), other.e)

    __radd__ = __add__

    def __neg__(self):
        obj = object.__new__(ComplexExt)
        obj.m = -self.m
        obj.e = self.e
        return obj

    def __sub__(self, other):
        if not isinstance(other, ComplexExt):
            other = ComplexExt.from_value(other)
        return self + (-other)

    def __rsub__(self, other):
        return ComplexExt.from_value(other) + (-self)

    def square(self) -> "ComplexExt":
        return ComplexExt._raw(self.m * self.m, 2 * self.e)

    def conjugate(self) -> "ComplexExt":
        obj = object.__new__(ComplexExt)
        obj.m = self.m.conjugate()
        obj.e = self.e
        return obj

    # -- comparison / display ----------------------------------------------
    def __eq__(self, other):
        if isinstance(other, ComplexExt):
            return self.m == other.m and self.e == other.e
        if isinstance(other, (int, float, complex)):
            return self == ComplexExt.from_value(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.m, self.e))

    def __repr__(self):
        return f"ComplexExt({self.m!r}, {self.e})"

    def __reduce__(self):
        return (_restore, (self.m, self.e))


def _restore(m: complex, e: int) -> ComplexExt:
    obj = object.__new__(ComplexExt)
    obj.m = m
    obj.e = e
    return obj


def _fmt(d: Decimal) -> str:
    if d == 0:
        return "0"
    return f"{d.normalize():e}"


ZERO = ComplexExt(0j, 0)
ONE = ComplexExt(1.0, 0)


def ext_mul(u: ComplexExt, v: ComplexExt) -> ComplexExt:
    return u * v


def ext_add(u: ComplexExt, v: ComplexExt) -> ComplexExt:
    return u + v


def ext_log_mag(u: ComplexExt) -> float:
    """``ln|u|``; the log of zero is ``-math.inf``."""
    return u.log_abs()


def as_ext(value) -> ComplexExt:
    return ComplexExt.from_value(value)


def log_plus(value: float) -> float:
    return value if value > 0.0 else 0.0
