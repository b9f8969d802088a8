"""Exact dyadic arithmetic for distances.

A :class:`Dyadic` holds ``num * 2**exp`` with an arbitrary-precision integer
numerator, normalized so that ``num`` is odd (or zero with ``exp == 0``).
Everything the search algorithms do with distances (sums, differences,
halving, comparison against ``2**i``) stays exact, which matters once
distances reach ``2**443`` and differ by 1.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Integral
from typing import Union

__all__ = [
    "Dyadic",
    "Distance",
    "pow2",
    "ceil_log2",
    "compare",
    "format_dyadic",
    "parse_dyadic",
]


class Dyadic:
    """Non-negative dyadic rational ``num * 2**exp``. Immutable."""

    __slots__ = ("num", "exp")

    num: int
    exp: int

    def __init__(self, num: int = 0, exp: int = 0) -> None:
        if not isinstance(num, Integral) or not isinstance(exp, Integral):
            raise TypeError("Dyadic needs integer numerator and exponent")
        num, exp = int(num), int(exp)
        if num < 0:
            raise ValueError(f"distances are non-negative, got {num}*2^{exp}")
        if num == 0:
            exp = 0
        else:
            tz = (num & -num).bit_length() - 1
            if tz:
                num >>= tz
                exp += tz
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def coerce(cls, value: Union["Dyadic", int, Fraction]) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, Integral):
            return cls(int(value))
        if isinstance(value, Fraction):
            den = value.denominator
            if den & (den - 1):
                raise ValueError(f"{value} is not dyadic")
            return cls(value.numerator, -(den.bit_length() - 1))
        raise TypeError(f"cannot make a Dyadic from {type(value).__name__}")

    # arithmetic

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = min(self.exp, other.exp)
        return self.num << (self.exp - e), other.num << (other.exp - e), e

    def __add__(self, other):
        if isinstance(other, Integral):
            other = Dyadic(int(other))
        elif not isinstance(other, Dyadic):
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Integral):
            other = Dyadic(int(other))
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._aligned(other)
        if a < b:
            raise ValueError("difference would be negative")
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        if isinstance(other, Integral):
            return Dyadic(int(other)) - self
        return NotImplemented

    def half(self) -> "Dyadic":
        return Dyadic(self.num, self.exp - 1) if self.num else self

    def double(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1) if self.num else self

    def absdiff(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(Dyadic.coerce(other))
        return Dyadic(abs(a - b), e)

    # comparison

    def _cmp(self, other) -> int:
        if isinstance(other, Dyadic):
            a, b, _ = self._aligned(other)
        elif isinstance(other, Integral):
            other = int(other)
            if other < 0:
                return 1
            if self.exp >= 0:
                a, b = self.num << self.exp, other
            else:
                a, b = self.num, other << -self.exp
        elif isinstance(other, Fraction):
            x = self.to_fraction()
            return (x > other) - (x < other)
        elif isinstance(other, float):
            if math.isinf(other):
                return -1 if other > 0 else 1
            x = self.to_fraction()
            y = Fraction(other)
            return (x > y) - (x < y)
        else:
            raise TypeError
        return (a > b) - (a < b)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self.exp >= 0:
            return hash(self.num << self.exp)
        return hash(self.to_fraction())

    def __bool__(self) -> bool:
        return bool(self.num)

    # conversion

    def to_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num << self.exp)
        return Fraction(self.num, 1 << -self.exp)

    def scaled(self, exp: int) -> int:
        """Return ``self / 2**exp`` as an int; ``exp`` must not exceed ``self.exp``."""
        if self.num and exp > self.exp:
            raise ValueError(f"{self} is not a multiple of 2^{exp}")
        return self.num << (self.exp - exp) if self.num else 0

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __int__(self) -> int:
        if self.exp < 0:
            raise ValueError(f"{self} is not an integer")
        return self.num << self.exp

    def __repr__(self) -> str:
        return f"Dyadic({format_dyadic(self)})"

    def __str__(self) -> str:
        return format_dyadic(self)

    def __reduce__(self):
        return (Dyadic, (self.num, self.exp))


Distance = Union[Dyadic, float]


def pow2(i: int) -> Dyadic:
    return Dyadic(1, i)


def compare(a, b) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if isinstance(a, Dyadic):
        return a._cmp(b)
    if isinstance(b, Dyadic):
        return -b._cmp(a)
    return (a > b) - (a < b)


def ceil_log2(x: Distance) -> int:
    """Smallest integer ``L`` with ``2**L >= x`` for ``x > 0``."""
    if isinstance(x, Dyadic):
        if not x.num:
            raise ValueError("ceil_log2 of zero")
        return x.exp + (x.num - 1).bit_length()
    if x <= 0:
        raise ValueError("ceil_log2 of non-positive value")
    mant, e = math.frexp(x)
    return e - 1 if mant == 0.5 else e


_DYADIC_RE = re.compile(r"^\s*(\d+)\s*\*\s*2\^\s*(-?\d+)\s*$")


def format_dyadic(x: Dyadic) -> str:
    return f"{x.num}*2^{x.exp}"


def parse_dyadic(text: str) -> Dyadic:
    m = _DYADIC_RE.match(text)
    if m is None:
        raise ValueError(f"malformed dyadic literal {text!r}, expected 'm*2^e'")
    return Dyadic(int(m.group(1)), int(m.group(2)))
