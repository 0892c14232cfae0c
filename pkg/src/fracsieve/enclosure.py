"""Certified enclosures with exact rational endpoints.

Transcendental quantities (natural logarithms) come from ``mpmath.iv``, whose
outward rounding guarantees the true value lies between the endpoints; the
endpoints are then lifted to :class:`fractions.Fraction` so that every
downstream comparison is exact.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv

DEFAULT_PRECISION = 128
MAX_PRECISION = 4096


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` known to contain a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value) -> "Enclosure":
        v = Fraction(value)
        return cls(v, v)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __mul__(self, other: "Enclosure | Fraction | int") -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.point(other)
        products = (self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi)
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("enclosure contains zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def __float__(self) -> float:
        return float(self.mid)


@contextmanager
def iv_precision(bits: int):
    """Temporarily set the working precision of ``mpmath.iv`` (not thread-safe)."""
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    value = Fraction(int(man)) * Fraction(2) ** exp
    return -value if sign else value


def from_iv(x) -> Enclosure:
    """Convert an ``mpmath.iv.mpf`` interval to an exact :class:`Enclosure`."""
    lo, hi = x._mpi_
    return Enclosure(_raw_to_fraction(lo), _raw_to_fraction(hi))


def iv_rational(q: Fraction):
    q = Fraction(q)
    return iv.mpf(q.numerator) / q.denominator


def ln_enclosure(x, precision: int = DEFAULT_PRECISION) -> Enclosure:
    """Enclosure of the natural logarithm of a positive rational."""
    with iv_precision(precision):
        return from_iv(iv.log(iv_rational(Fraction(x))))


def floor_log2(x: Fraction) -> int:
    """Exact ``floor(log2(x))`` for a positive rational."""
    if x <= 0:
        raise ValueError("floor_log2 needs a positive argument")
    p, q = x.numerator, x.denominator
    k = p.bit_length() - q.bit_length()
    # now 2^(k-1) < p/q < 2^(k+1)
    if k >= 0:
        if p < q << k:
            k -= 1
    elif p << -k < q:
        k -= 1
    return k


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)
