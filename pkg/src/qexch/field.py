"""Exact arithmetic in Q(i, sqrt(m)).

A value is stored as integer numerators (A, B, C, D) over one positive
common denominator, representing (A + B*i + C*sqrt(m) + D*i*sqrt(m)) / den.
The public components ``a, b, c, d`` are reduced :class:`fractions.Fraction`
objects.  Values are immutable.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

Rational = Fraction
Number = Union[int, Fraction, "ExactScalar"]


class RadicandMismatch(ValueError):
    """Two scalars from different Q(i, sqrt(m)) contexts were combined."""


def _square_root(m: int) -> int | None:
    s = math.isqrt(m)
    return s if s * s == m else None


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    """Textual form ``p/q``, with ``/q`` omitted when q is 1."""
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class ExactScalar:
    __slots__ = ("_num", "_den", "_m", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0, radicand: int = 1):
        if not isinstance(radicand, int) or isinstance(radicand, bool) or radicand < 1:
            raise ValueError(f"radicand must be a positive integer, got {radicand!r}")
        fa, fb, fc, fd = (_as_fraction(x) for x in (a, b, c, d))
        den = math.lcm(fa.denominator, fb.denominator, fc.denominator, fd.denominator)
        self._set(
            fa.numerator * (den // fa.denominator),
            fb.numerator * (den // fb.denominator),
            fc.numerator * (den // fc.denominator),
            fd.numerator * (den // fd.denominator),
            den,
            radicand,
        )

    @classmethod
    def _raw(cls, A: int, B: int, C: int, D: int, den: int, m: int) -> ExactScalar:
        obj = object.__new__(cls)
        obj._set(A, B, C, D, den, m)
        return obj

    def _set(self, A, B, C, D, den, m):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if C or D:
            s = _square_root(m)
            if s is not None:
                A, B, C, D = A + C * s, B + D * s, 0, 0
        if den < 0:
            A, B, C, D, den = -A, -B, -C, -D, -den
        g = math.gcd(A, B, C, D, den)
        if g > 1:
            A, B, C, D, den = A // g, B // g, C // g, D // g, den // g
        self._num = (A, B, C, D)
        self._den = den
        self._m = m
        self._hash = None

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_rational(cls, q, radicand: int = 1) -> ExactScalar:
        return cls(q, 0, 0, 0, radicand)

    @classmethod
    def inv_sqrt(cls, m: int) -> ExactScalar:
        """1/sqrt(m), stored rationalized as (1/m)*sqrt(m)."""
        return cls(0, 0, Fraction(1, m), 0, m)

    @classmethod
    def i(cls, radicand: int = 1) -> ExactScalar:
        return cls(0, 1, 0, 0, radicand)

    # -- accessors --------------------------------------------------------

    @property
    def a(self) -> Fraction:
        return Fraction(self._num[0], self._den)

    @property
    def b(self) -> Fraction:
        return Fraction(self._num[1], self._den)

    @property
    def c(self) -> Fraction:
        return Fraction(self._num[2], self._den)

    @property
    def d(self) -> Fraction:
        return Fraction(self._num[3], self._den)

    @property
    def radicand(self) -> int:
        return self._m

    @property
    def numerators(self) -> tuple[int, int, int, int]:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return not any(self._num)

    def is_real(self) -> bool:
        return self._num[1] == 0 and self._num[3] == 0

    def is_rational(self) -> bool:
        return self._num[1] == self._num[2] == self._num[3] == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other) -> ExactScalar | None:
        if isinstance(other, ExactScalar):
            if other._m != self._m:
                raise RadicandMismatch(
                    f"radicand {self._m} cannot be combined with radicand {other._m}"
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            q = Fraction(other)
            return ExactScalar._raw(q.numerator, 0, 0, 0, q.denominator, self._m)
        return None

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        d1, d2 = self._den, y._den
        A1, B1, C1, D1 = self._num
        A2, B2, C2, D2 = y._num
        if d1 == d2:
            return ExactScalar._raw(A1 + A2, B1 + B2, C1 + C2, D1 + D2, d1, self._m)
        return ExactScalar._raw(
            A1 * d2 + A2 * d1, B1 * d2 + B2 * d1, C1 * d2 + C2 * d1, D1 * d2 + D2 * d1,
            d1 * d2, self._m,
        )

    __radd__ = __add__

    def __neg__(self) -> ExactScalar:
        A, B, C, D = self._num
        return ExactScalar._raw(-A, -B, -C, -D, self._den, self._m)

    def __sub__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y + (-self)

    def __mul__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        m = self._m
        A1, B1, C1, D1 = self._num
        A2, B2, C2, D2 = y._num
        return ExactScalar._raw(
            A1 * A2 - B1 * B2 + m * (C1 * C2 - D1 * D2),
            A1 * B2 + B1 * A2 + m * (C1 * D2 + D1 * C2),
            A1 * C2 + C1 * A2 - B1 * D2 - D1 * B2,
            A1 * D2 + D1 * A2 + B1 * C2 + C1 * B2,
            self._den * y._den,
            m,
        )

    __rmul__ = __mul__

    def conj(self) -> ExactScalar:
        A, B, C, D = self._num
        return ExactScalar._raw(A, -B, C, -D, self._den, self._m)

    def times_i(self) -> ExactScalar:
        A, B, C, D = self._num
        return ExactScalar._raw(-B, A, -D, C, self._den, self._m)

    def inverse(self) -> ExactScalar:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        m = self._m
        A, B, C, D = self._num
        # x = u + v*r with Gaussian integers u = A + Bi, v = C + Di, r = sqrt(m).
        # x * (u - v*r) = w := u^2 - m v^2;  w * conj(w) = |w|^2 is rational.
        wr = A * A - B * B - m * (C * C - D * D)
        wi = 2 * A * B - 2 * m * C * D
        norm = wr * wr + wi * wi
        # (u - v r) * conj(w), expanded over the basis {1, i, r, ir}
        P = A * wr + B * wi
        Q = B * wr - A * wi
        R = -(C * wr + D * wi)
        S = -(D * wr - C * wi)
        den = self._den
        return ExactScalar._raw(P * den, Q * den, R * den, S * den, norm, m)

    def __truediv__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self * y.inverse()

    def __rtruediv__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y * self.inverse()

    # -- comparison -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactScalar):
            return self._m == other._m and self._den == other._den and self._num == other._num
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            q = Fraction(other)
            return self._num == (q.numerator, 0, 0, 0) and self._den == q.denominator
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(Fraction(self._num[0], self._den))
            else:
                self._hash = hash((self._num, self._den, self._m))
        return self._hash

    # -- floating bridge --------------------------------------------------

    def to_complex(self) -> complex:
        A, B, C, D = self._num
        r = math.sqrt(self._m)
        den = self._den
        re_part = Fraction(A, den) + Fraction(C, den) * Fraction(r) if C else Fraction(A, den)
        im_part = Fraction(B, den) + Fraction(D, den) * Fraction(r) if D else Fraction(B, den)
        return complex(float(re_part), float(im_part))

    def __complex__(self) -> complex:
        return self.to_complex()

    # -- text -------------------------------------------------------------

    def to_dict(self) -> dict[str, object]:
        return {
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "c": format_rational(self.c),
            "d": format_rational(self.d),
            "radicand": self._m,
        }

    @classmethod
    def from_dict(cls, data: dict, radicand: int | None = None) -> ExactScalar:
        unknown = set(data) - {"a", "b", "c", "d", "radicand"}
        if unknown:
            raise ValueError(f"unknown scalar keys: {sorted(unknown)}")
        m = data.get("radicand", radicand)
        if m is None:
            raise ValueError("scalar needs a radicand")
        if radicand is not None and m != radicand:
            raise RadicandMismatch(f"scalar radicand {m} does not match {radicand}")
        parts = []
        for key in "abcd":
            raw = data.get(key, "0")
            if not isinstance(raw, str):
                raise ValueError(f"component {key!r} must be a 'p/q' string")
            parts.append(_parse_rational(raw))
        return cls(*parts, radicand=m)

    def __str__(self) -> str:
        m = self._m
        pieces = []
        for value, unit in zip((self.a, self.b, self.c, self.d), ("", "i", f"√{m}", f"i√{m}")):
            if value == 0:
                continue
            if unit and abs(value) == 1:
                body = unit
            else:
                body = format_rational(abs(value)) + unit
            pieces.append(("-" if value < 0 else "+", body))
        if not pieces:
            return "0"
        sign, body = pieces[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            out += sign + body
        return out

    def __repr__(self) -> str:
        return f"ExactScalar({self}, radicand={self._m})"

    @classmethod
    def parse(cls, text: str, radicand: int = 1) -> ExactScalar:
        """Inverse of ``str()``: e.g. ``"3/2"``, ``"-i"``, ``"1/28√28"``, ``"1-i√28"``."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty scalar text")
        if s == "0":
            return cls(radicand=radicand)
        parts = [Fraction(0)] * 4
        pos = 0
        for match in _TERM.finditer(s):
            if match.start() != pos or not match.group(0):
                break
            pos = match.end()
            sign, coef, unit_i, root = match.group("sign", "coef", "i", "root")
            if coef is None and unit_i is None and root is None:
                raise ValueError(f"malformed scalar text: {text!r}")
            if root is not None and int(root) != radicand:
                raise RadicandMismatch(f"text uses √{root} but radicand is {radicand}")
            value = _parse_rational(coef) if coef else Fraction(1)
            if sign == "-":
                value = -value
            slot = (1 if unit_i else 0) + (2 if root is not None else 0)
            parts[slot] += value
        if pos != len(s):
            raise ValueError(f"malformed scalar text: {text!r}")
        return cls(*parts, radicand=radicand)


_TERM = re.compile(r"(?P<sign>[+-]?)(?P<coef>\d+(?:/\d+)?)?(?P<i>i)?(?:√(?P<root>\d+))?")
_RATIONAL = re.compile(r"^-?\d+(?:/\d+)?$")


def _parse_rational(text: str) -> Fraction:
    if not _RATIONAL.match(text.strip()):
        raise ValueError(f"not a rational 'p/q' string: {text!r}")
    q = Fraction(text.strip())
    return q


# Functional forms of the arithmetic, mirroring the method API.

def scalar_add(x: ExactScalar, y: ExactScalar) -> ExactScalar:
    return x + y


def scalar_mul(x: ExactScalar, y: ExactScalar) -> ExactScalar:
    return x * y


def scalar_conj(x: ExactScalar) -> ExactScalar:
    return x.conj()


def scalar_inv(x: ExactScalar) -> ExactScalar:
    return x.inverse()


def scalar_to_float(x: ExactScalar) -> tuple[float, float]:
    z = x.to_complex()
    return z.real, z.imag
