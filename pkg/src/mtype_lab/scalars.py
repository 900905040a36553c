"""Exact arithmetic in the ring Q(sqrt 2).

Every value produced by the Haar, glueing and blocking constructions is of
the form ``a + b*sqrt(2)`` with rational ``a`` and ``b``.  Comparisons are
decided exactly; floats appear only when a value is rendered.
"""

from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = ["QuadRational", "Scalar", "as_quad", "parse_rational", "format_rational", "ZERO", "ONE", "SQRT2"]

Scalar = Union["QuadRational", int, Fraction]


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or a decimal literal such as ``"0.5"``."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"expected rational string, got {type(text).__name__}")
    return Fraction(text.strip())


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


class QuadRational:
    """The number ``a + b*sqrt(2)`` with ``a, b`` rational."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if type(a) is Fraction else Fraction(a)
        self.b = b if type(b) is Fraction else Fraction(b)

    # construction helpers -------------------------------------------------

    @classmethod
    def sqrt2_power(cls, e: int) -> "QuadRational":
        """``sqrt(2) ** e`` for any integer ``e``."""
        half, odd = divmod(e, 2)
        scale = Fraction(2) ** half
        return cls(0, scale) if odd else cls(scale, 0)

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if type(other) is QuadRational:
            return QuadRational(self.a + other.a, self.b + other.b)
        if isinstance(other, Rational):
            return QuadRational(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QuadRational(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if type(other) is QuadRational:
            return QuadRational(self.a - other.a, self.b - other.b)
        if isinstance(other, Rational):
            return QuadRational(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Rational):
            return QuadRational(other - self.a, -self.b)
        return NotImplemented

    def __mul__(self, other):
        if type(other) is QuadRational:
            a, b, c, d = self.a, self.b, other.a, other.b
            if not b and not d:
                return QuadRational(a * c, 0)
            return QuadRational(a * c + 2 * b * d, a * d + b * c)
        if isinstance(other, Rational):
            return QuadRational(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "QuadRational":
        return QuadRational(self.a, -self.b)

    def field_norm(self) -> Fraction:
        """``a**2 - 2*b**2``; zero only for the zero element."""
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "QuadRational":
        if not self:
            raise ZeroDivisionError("QuadRational division by zero")
        if not self.b:
            return QuadRational(1 / self.a, 0)
        n = self.field_norm()
        return QuadRational(self.a / n, -self.b / n)

    def __truediv__(self, other):
        if type(other) is QuadRational:
            if not other.b:
                if not other.a:
                    raise ZeroDivisionError("QuadRational division by zero")
                return QuadRational(self.a / other.a, self.b / other.a)
            return self * other.inverse()
        if isinstance(other, Rational):
            if not other:
                raise ZeroDivisionError("QuadRational division by zero")
            return QuadRational(self.a / other, self.b / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return QuadRational(other, 0) * self.inverse()
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result, base = QuadRational(1, 0), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # order ---------------------------------------------------------------

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 against 2 b^2
        d = a * a - 2 * b * b
        return sa if d > 0 else -sa

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def _cmp(self, other) -> int:
        if type(other) is not QuadRational:
            if not isinstance(other, Rational):
                return NotImplemented
            other = QuadRational(other, 0)
        return (self - other).sign()

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __eq__(self, other):
        if type(other) is QuadRational:
            return self.a == other.a and self.b == other.b
        if isinstance(other, Rational):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    # rendering -----------------------------------------------------------

    def is_rational(self) -> bool:
        return not self.b

    def to_decimal(self, digits: int = 40) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits
            a = Decimal(self.a.numerator) / Decimal(self.a.denominator)
            if not self.b:
                return +a
            b = Decimal(self.b.numerator) / Decimal(self.b.denominator)
            return a + b * Decimal(2).sqrt()

    def __float__(self):
        if not self.b:
            return float(self.a)
        return float(self.to_decimal())

    def sqrt_float(self) -> float:
        """Nonnegative square root, for display; exact work stays squared."""
        if self.sign() < 0:
            raise ValueError("square root of a negative value")
        with localcontext() as ctx:
            ctx.prec = 40
            return float(self.to_decimal().sqrt())

    def to_json(self) -> list:
        return [format_rational(self.a), format_rational(self.b)]

    @classmethod
    def from_json(cls, obj) -> "QuadRational":
        if isinstance(obj, (list, tuple)):
            if len(obj) != 2:
                raise ValueError(f"scalar must be a pair [a, b], got {obj!r}")
            return cls(parse_rational(obj[0]), parse_rational(obj[1]))
        return cls(parse_rational(obj), 0)

    def __repr__(self):
        if not self.b:
            return f"QuadRational({self.a})"
        return f"QuadRational({self.a}, {self.b})"

    def __str__(self):
        if not self.b:
            return str(self.a)
        if not self.a:
            return f"{self.b}*sqrt2"
        op = "+" if self.b > 0 else "-"
        return f"{self.a} {op} {abs(self.b)}*sqrt2"


ZERO = QuadRational(0, 0)
ONE = QuadRational(1, 0)
SQRT2 = QuadRational(0, 1)


def as_quad(x) -> QuadRational:
    if type(x) is QuadRational:
        return x
    if isinstance(x, Rational):
        return QuadRational(x, 0)
    if isinstance(x, str):
        return QuadRational(parse_rational(x), 0)
    raise TypeError(f"cannot convert {type(x).__name__} to QuadRational exactly")
