"""Scalar arithmetic for the two computation modes.

Exact mode works over the rationals (``fractions.Fraction``) optionally
extended by i (``GaussianRational``); float mode works over complex
doubles.  Float comparisons always go through a single session tolerance
(default ``DEFAULT_TOL``) passed down by the caller, never a per-call
epsilon.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

DEFAULT_TOL = 1e-10

EXACT = "exact"
FLOAT = "float"


class GaussianRational:
    """a + b*i with exact rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"{self.re}+{self.im}i"


ExactScalar = Union[Fraction, GaussianRational]


def conj_scalar(x):
    """Complex conjugate that works across both scalar modes."""
    if isinstance(x, GaussianRational):
        return x.conjugate()
    if isinstance(x, complex):
        return x.conjugate()
    return x


def encode_value(x) -> object:
    """JSON-stable encoding: exact values as strings, floats round-trip via repr."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, GaussianRational):
        return {"re": str(x.re), "im": str(x.im)}
    if isinstance(x, complex):
        if x.imag == 0.0:
            return x.real
        return [x.real, x.imag]
    if isinstance(x, (int, float)):
        return float(x)
    raise TypeError(f"cannot encode scalar {x!r}")


def decode_value(obj, mode: str):
    """Inverse of encode_value; mode decides the target scalar type."""
    if mode == EXACT:
        if isinstance(obj, str):
            return Fraction(obj)
        if isinstance(obj, int):
            return Fraction(obj)
        if isinstance(obj, dict):
            return GaussianRational(Fraction(obj["re"]), Fraction(obj["im"]))
        raise ValueError(f"not an exact scalar encoding: {obj!r}")
    if mode == FLOAT:
        if isinstance(obj, (int, float)):
            return complex(obj)
        if isinstance(obj, (list, tuple)) and len(obj) == 2:
            return complex(obj[0], obj[1])
        if isinstance(obj, str):
            return complex(float(Fraction(obj)))
        if isinstance(obj, dict):
            return complex(float(Fraction(obj["re"])), float(Fraction(obj["im"])))
        raise ValueError(f"not a float scalar encoding: {obj!r}")
    raise ValueError(f"unknown scalar mode {mode!r}")


def zero_scalar(mode: str):
    return Fraction(0) if mode == EXACT else 0j


def one_scalar(mode: str):
    return Fraction(1) if mode == EXACT else 1 + 0j


def scalar_is_zero(x, tol: float | None) -> bool:
    """Exact zero test when tol is None, |x| <= tol otherwise."""
    if tol is None:
        return not bool(x)
    return abs(complex(x)) <= tol
