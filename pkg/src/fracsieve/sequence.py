"""Growth sequences t_n driving the sieve.

Two kinds are supported:

* ``polynomial``: t_n = f(n) with exact rational coefficients; ``eval`` is a
  point rational.
* ``power``: t_n = n**gamma with rational gamma; ``eval`` returns a certified
  enclosure of width at most ``2**-precision`` computed by exact integer roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import gmpy2
import mpmath

from .enclosure import Enclosure
from .errors import DomainError, SequenceError

EAGER_SCAN = 1000


@dataclass(frozen=True)
class GrowthSequence:
    kind: str
    gamma: Fraction
    coefficients: tuple[Fraction, ...] = ()
    eps1: Fraction = Fraction(1)
    n_min: int = 2
    _int_coeffs: tuple[int, ...] | None = field(default=None, repr=False, compare=False)

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            value = hash((self.kind, self.gamma, self.coefficients, self.eps1, self.n_min))
            object.__setattr__(self, "_hash", value)
            return value

    @property
    def spec(self) -> str:
        """Round-trippable text form (``poly:...`` / ``power:...``)."""
        if self.kind == "polynomial":
            return "poly:" + ",".join(str(c) for c in self.coefficients)
        return f"power:gamma={self.gamma},eps1={self.eps1}"

    def exact(self, n: int) -> Fraction | None:
        """Point value for polynomial kind, ``None`` for power kind."""
        if self.kind != "polynomial":
            return None
        if self._int_coeffs is not None:
            acc = 0
            for c in self._int_coeffs:
                acc = acc * n + c
            return Fraction(acc)
        acc = Fraction(0)
        for c in self.coefficients:
            acc = acc * n + c
        return acc

    def eval(self, n: int, precision: int = 64) -> Enclosure:
        if n < self.n_min:
            raise DomainError(f"sequence: n={n} below n_min={self.n_min}")
        return self._eval_unchecked(n, precision)

    def _eval_unchecked(self, n: int, precision: int = 64) -> Enclosure:
        point = self.exact(n)
        if point is not None:
            return Enclosure(point, point)
        p, q = self.gamma.numerator, self.gamma.denominator
        root, exact = gmpy2.iroot(gmpy2.mpz(n) ** p << (precision * q), q)
        lo = Fraction(int(root), 1 << precision)
        hi = lo if exact else Fraction(int(root) + 1, 1 << precision)
        return Enclosure(lo, hi)

    def approx(self, n) -> float:
        point = self.exact(n)
        if point is not None:
            return float(point)
        return float(n) ** float(self.gamma)


def make_polynomial(coefficients: Sequence, n_min: int = 2) -> GrowthSequence:
    """Polynomial sequence from coefficients, highest degree first."""
    coeffs = [Fraction(c) for c in coefficients]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if len(coeffs) < 2:
        raise SequenceError("sequence: polynomial degree must be >= 1")
    if coeffs[0] <= 0:
        raise SequenceError("sequence: leading coefficient must be positive")
    if n_min < 2:
        raise SequenceError(f"sequence: n_min={n_min} must be >= 2", n_min)
    ints = tuple(int(c) for c in coeffs) if all(c.denominator == 1 for c in coeffs) else None
    seq = GrowthSequence("polynomial", Fraction(len(coeffs) - 1), tuple(coeffs),
                         Fraction(1), n_min, ints)
    _scan(seq, n_min, n_min + EAGER_SCAN)
    return seq


def make_power(gamma, eps1=1, n_min: int = 2) -> GrowthSequence:
    gamma, eps1 = Fraction(gamma), Fraction(eps1)
    if gamma <= 0:
        raise SequenceError("sequence: gamma must be positive")
    if eps1 <= 0:
        raise SequenceError("sequence: eps1 must be positive")
    if n_min < 2:
        raise SequenceError(f"sequence: n_min={n_min} must be >= 2", n_min)
    return GrowthSequence("power", gamma, (), eps1, n_min)


def _scan(seq: GrowthSequence, lo: int, hi: int) -> None:
    prev = seq.exact(lo)
    if prev < 1:
        raise SequenceError(f"sequence: t({lo}) = {prev} < 1", lo)
    for n in range(lo + 1, hi + 1):
        cur = seq.exact(n)
        if cur <= prev:
            raise SequenceError(f"sequence: not increasing at n={n}", n)
        prev = cur


def check_increasing(seq: GrowthSequence, n: int) -> None:
    """Lazy re-check used while sieving beyond the eager scan."""
    if seq.kind != "polynomial" or n <= seq.n_min:
        return
    if seq.exact(n) <= seq.exact(n - 1):
        raise SequenceError(f"sequence: not increasing at n={n}", n)


def parse_sequence(text: str, n_min: int = 2) -> GrowthSequence:
    """Parse ``poly:c_d,...,c_0`` or ``power:gamma=<q>,eps1=<q>``."""
    kind, _, body = text.strip().partition(":")
    if kind == "poly":
        try:
            coeffs = [Fraction(tok.strip()) for tok in body.split(",") if tok.strip()]
        except (ValueError, ZeroDivisionError) as exc:
            raise SequenceError(f"sequence: bad coefficient in {text!r}") from exc
        return make_polynomial(coeffs, n_min)
    if kind == "power":
        fields = {}
        for tok in body.split(","):
            key, eq, val = tok.partition("=")
            if not eq:
                raise SequenceError(f"sequence: expected key=value in {text!r}")
            fields[key.strip()] = Fraction(val.strip())
        if "gamma" not in fields:
            raise SequenceError("sequence: power kind needs gamma=")
        return make_power(fields["gamma"], fields.get("eps1", 1), n_min)
    raise SequenceError(f"sequence: unknown kind {kind!r}")


@dataclass
class GrowthReport:
    o_constant: float
    o_argmax: int
    band_min: float
    band_max: float
    pairs: list[tuple[int, int, float]]


def _ratio_power(seq: GrowthSequence, n: int, m: int) -> Fraction | mpmath.mpf:
    """(t_m/t_n) / (m/n)**gamma, exact when possible."""
    ratio = Fraction(m, n)
    if seq.kind == "polynomial" and seq.gamma.denominator == 1:
        return seq.exact(m) / seq.exact(n) / ratio ** int(seq.gamma)
    with mpmath.workdps(40):
        tm, tn = mpmath.mpf(seq.approx(m)), mpmath.mpf(seq.approx(n))
        if seq.kind == "power":
            return mpmath.mpf(1)
        return tm / tn / mpmath.power(mpmath.mpf(m) / n, mpmath.mpf(seq.gamma.numerator) / seq.gamma.denominator)


def default_pairs(n_lo: int, n_hi: int, points: int = 12) -> list[tuple[int, int]]:
    grid = sorted({int(round(n_lo * (n_hi / n_lo) ** (i / (points - 1)))) for i in range(points)})
    return list(combinations(grid, 2))


def validate_growth(seq: GrowthSequence, n_lo: int, n_hi: int,
                    pairs: Sequence[tuple[int, int]] | None = None) -> GrowthReport:
    """Empirical O-constant of the ratio expansion and the (m/n)**gamma band."""
    if not seq.n_min <= n_lo < n_hi:
        raise DomainError(f"sequence: need n_min <= n_lo < n_hi, got [{n_lo}, {n_hi}]")
    gamma = seq.gamma
    exact = seq.kind == "polynomial" and seq.eps1.denominator == 1
    best, arg = -1.0, n_lo
    with mpmath.workdps(40):
        for n in range(n_lo, n_hi):
            if exact:
                dev = abs(seq.exact(n + 1) / seq.exact(n) - 1 - gamma / n) * Fraction(n) ** (1 + int(seq.eps1))
                val = float(dev)
            else:
                g = mpmath.mpf(gamma.numerator) / gamma.denominator
                r = mpmath.power(mpmath.mpf(n + 1) / n, g) if seq.kind == "power" else \
                    mpmath.mpf(seq.approx(n + 1)) / seq.approx(n)
                e = mpmath.mpf(seq.eps1.numerator) / seq.eps1.denominator
                val = float(abs(r - 1 - g / n) * mpmath.power(n, 1 + e))
            if val > best:
                best, arg = val, n
    if pairs is None:
        pairs = default_pairs(n_lo, n_hi)
    bands = [(n, m, float(_ratio_power(seq, n, m))) for n, m in pairs]
    values = [b for _, _, b in bands] or [math.nan]
    return GrowthReport(best, arg, min(values), max(values), bands)
