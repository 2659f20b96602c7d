"""Exact Gaussian-rational scalars.

Operator entries are ``i*hbar/(E_s - E_s')``: purely imaginary rationals
when the spectrum and hbar are rational.  A perturbed diagonal adds real
rationals.  ``GaussRat`` carries both parts as :class:`fractions.Fraction`
so that every identity checked in exact mode is checked with ``==``.

Mixing with ``float``/``complex`` is refused on purpose (``TypeError``);
exact and floating code paths must never silently blend.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions, ``"p/q"``/decimal strings, and (exactly) floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


class GaussRat:
    """``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussRat):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GaussRat(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussRat(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GaussRat(self.re * other, self.im * other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("GaussRat division by zero")
            return GaussRat(self.re / other, self.im / other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        # Exact whenever the modulus is rational by inspection.
        if self.im == 0:
            return abs(self.re)
        if self.re == 0:
            return abs(self.im)
        return math.sqrt(self.abs2())

    def __eq__(self, other):
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRat({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = GaussRat()
I = GaussRat(0, 1)


def is_exact_scalar(value) -> bool:
    return isinstance(value, (GaussRat, Fraction)) or (
        isinstance(value, int) and not isinstance(value, bool)
    )


def to_complex(value) -> complex:
    return complex(value)
