"""Parameter system: c, delta_n, depth-gap h(n), dyadic levels l_n, the ladder.

All logarithms are natural.  Quantities involving a logarithm are carried as
:class:`~fracsieve.enclosure.Enclosure` objects; integer-valued outputs
(``h``, ``l_n``) are resolved by raising precision until the enclosure no
longer straddles a decision boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import iv

from .enclosure import (DEFAULT_PRECISION, MAX_PRECISION, Enclosure, ceil_frac,
                        floor_log2, from_iv, iv_precision, iv_rational)
from .errors import CapacityError, DomainError, PrecisionError
from .sequence import GrowthSequence

C_FACTOR = 60


def c_of_gamma(gamma) -> float:
    """``60 * ln(2 + 1/gamma)``."""
    gamma = Fraction(gamma)
    if gamma <= 0:
        raise DomainError("params: gamma must be positive")
    return C_FACTOR * math.log(2 + 1 / gamma)


@dataclass(frozen=True, eq=True)
class SieveParams:
    gamma: Fraction
    c_mode: str = "paper"
    c_value: Fraction | None = None
    h_mode: str = "effective"
    n_start: int = 32
    eps2: Fraction = Fraction(1, 100)
    v: Fraction = Fraction(3, 5)
    index_cap: int = 10**15
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        object.__setattr__(self, "eps2", Fraction(self.eps2))
        object.__setattr__(self, "v", Fraction(self.v))
        if self.gamma <= 0:
            raise DomainError("params: gamma must be positive")
        if self.c_mode not in ("paper", "custom"):
            raise DomainError(f"params: unknown c_mode {self.c_mode!r}")
        if self.c_mode == "custom":
            if self.c_value is None or Fraction(self.c_value) <= 0:
                raise DomainError("params: custom c_mode needs a positive c_value")
            object.__setattr__(self, "c_value", Fraction(self.c_value))
        if self.h_mode not in ("paper", "effective"):
            raise DomainError(f"params: unknown h_mode {self.h_mode!r}")
        if self.n_start < 2:
            raise DomainError("params: n_start must be >= 2")
        if not 0 < self.v < 1:
            raise DomainError("params: v must lie in (0, 1)")

    def __hash__(self):
        # lru_cache keys on params once per stage; rehashing Fractions dominates otherwise
        try:
            return self._hash
        except AttributeError:
            value = hash(tuple(getattr(self, f) for f in self.__dataclass_fields__))
            object.__setattr__(self, "_hash", value)
            return value

    @property
    def c(self) -> float:
        return float(c_enclosure(self).mid)


def _c_iv(params: SieveParams):
    return _c_iv_cached(params.c_mode, params.c_value, params.gamma, iv.prec)


@lru_cache(maxsize=None)
def _c_iv_cached(c_mode, c_value, gamma, prec):
    if c_mode == "custom":
        return iv_rational(c_value)
    return C_FACTOR * iv.log(2 + iv_rational(1 / gamma))


@lru_cache(maxsize=None)
def c_enclosure(params: SieveParams, precision: int | None = None) -> Enclosure:
    if params.c_mode == "custom":
        return Enclosure.point(params.c_value)
    with iv_precision(precision or params.precision):
        return from_iv(_c_iv(params))


def _check_n(n: int) -> None:
    if n < 2:
        raise DomainError(f"params: n={n} < 2 (ln n must be positive)")


@lru_cache(maxsize=1 << 16)
def inv_delta(params: SieveParams, n: int, precision: int | None = None) -> Enclosure:
    """Enclosure of ``1/delta_n = c * n * ln n``."""
    _check_n(n)
    with iv_precision(precision or params.precision):
        return from_iv(_c_iv(params) * n * iv.log(n))


@lru_cache(maxsize=1 << 16)
def delta(params: SieveParams, n: int) -> Enclosure:
    """Enclosure of ``delta_n = 1/(c n ln n)``.

    The sieve removes with ``hi`` (never keeps a point of E_n); lower-bound
    consumers such as the cover-ratio check divide by ``lo``.
    """
    return inv_delta(params, n).reciprocal()


def h_paper(params: SieveParams, n: int) -> int:
    """``ceil(n**(1+1/gamma) * ln(n)**(2/gamma))``, forced to at least ``n+1``."""
    _check_n(n)
    g = params.gamma
    prec = params.precision
    while prec <= MAX_PRECISION:
        with iv_precision(prec):
            ln = iv.log(n)
            val = iv.exp(iv_rational(1 + 1 / g) * ln) * iv.exp(iv_rational(2 / g) * iv.log(ln))
            enc = from_iv(val)
        if ceil_frac(enc.lo) == ceil_frac(enc.hi):
            return max(ceil_frac(enc.lo), n + 1)
        prec *= 2
    raise PrecisionError(f"params: h_paper({n}) unresolved at {MAX_PRECISION} bits")


def _t(seq: GrowthSequence, n: int, params: SieveParams) -> Enclosure:
    return seq._eval_unchecked(n, params.precision)


def h_effective(params: SieveParams, seq: GrowthSequence, n: int) -> int:
    """Smallest ``m > n`` with ``t_m / t_n >= 1/delta_n`` (enclosure-safe)."""
    if n < max(2, seq.n_min):
        raise DomainError(f"params: h_effective needs n >= max(2, n_min), got {n}")
    target = _t(seq, n, params).hi * inv_delta(params, n).hi

    def ok(m: int) -> bool:
        return _t(seq, m, params).lo >= target

    lo, step = n, 1
    hi = n + 1
    while not ok(hi):
        lo = hi
        step *= 2
        hi = n + step
        if hi > params.index_cap:
            raise CapacityError(f"params: h_effective({n}) search exceeded index_cap={params.index_cap}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def h(params: SieveParams, seq: GrowthSequence, n: int) -> int:
    if params.h_mode == "paper":
        return h_paper(params, n)
    return h_effective(params, seq, n)


@lru_cache(maxsize=1 << 16)
def level_bracket(params: SieveParams, seq: GrowthSequence, n: int) -> tuple[int, Enclosure]:
    """``(l_n, enclosure of 2 t_n / delta_n)`` with the enclosure inside one octave."""
    _check_n(n)
    prec = params.precision
    while prec <= MAX_PRECISION:
        t = seq._eval_unchecked(n, prec)
        k = inv_delta(params, n, prec)
        x = Enclosure(2 * t.lo * k.lo, 2 * t.hi * k.hi)
        lo_level = floor_log2(x.lo)
        if lo_level == floor_log2(x.hi):
            return lo_level, x
        prec *= 2
    raise PrecisionError(f"params: l_{n} straddles a power of two at {MAX_PRECISION} bits")


def dyadic_level(params: SieveParams, seq: GrowthSequence, n: int) -> int:
    """``l_n = floor(log2(2 t_n / delta_n))``."""
    return level_bracket(params, seq, n)[0]


@dataclass(frozen=True)
class Ladder:
    entries: tuple[int, ...]
    mode: str

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> int:
        return self.entries[k]


def build_ladder(params: SieveParams, seq: GrowthSequence, n0: int, depth: int) -> Ladder:
    if n0 < max(2, seq.n_min):
        raise DomainError(f"params: ladder start n0={n0} below max(2, n_min)")
    if depth < 0:
        raise DomainError("params: depth must be >= 0")
    entries = [n0]
    for k in range(1, depth + 1):
        try:
            nxt = h(params, seq, entries[-1])
        except CapacityError as exc:
            raise CapacityError(f"params: ladder entry k={k}: {exc}") from exc
        if nxt > params.index_cap:
            raise CapacityError(f"params: ladder entry k={k} = {nxt} exceeds index_cap={params.index_cap}")
        entries.append(nxt)
    return Ladder(tuple(entries), params.h_mode)


@dataclass
class LadderReport:
    records: list[dict] = field(default_factory=list)
    growth_band_pass: bool = True
    depth_gap_pass: bool = True

    def to_dict(self) -> dict:
        return {"records": self.records, "growth_band_pass": self.growth_band_pass,
                "depth_gap_pass": self.depth_gap_pass}


def check_ladder(params: SieveParams, seq: GrowthSequence, ladder: Ladder) -> LadderReport:
    """Pairwise growth bounds, depth-gap condition, and log-ratio per ladder step."""
    if len(ladder) == 0:
        raise DomainError("params: empty ladder")
    report = LadderReport()
    g = mpmath.mpf(params.gamma.numerator) / params.gamma.denominator
    e2 = mpmath.mpf(params.eps2.numerator) / params.eps2.denominator
    with mpmath.workdps(50):
        for prev, cur in zip(ladder.entries, ladder.entries[1:]):
            lp, lc = mpmath.log(prev), mpmath.log(cur)
            lower_ok = (1 + 1 / g) * lp <= lc
            upper_ok = lc <= (1 + 1 / g + e2) * lp
            gap_lhs = _t(seq, cur, params).lo
            gap_rhs = _t(seq, prev, params).hi * inv_delta(params, prev).hi
            gap_ok = gap_lhs >= gap_rhs
            report.records.append({
                "n_prev": prev, "n": cur,
                "band_lower": bool(lower_ok), "band_upper": bool(upper_ok),
                "depth_gap": bool(gap_ok),
                "t_ratio": float(_t(seq, cur, params).mid / _t(seq, prev, params).mid),
                "inv_delta_prev": float(inv_delta(params, prev).mid),
                "log_ratio": float(lc / lp),
            })
            report.growth_band_pass &= bool(lower_ok and upper_ok)
            report.depth_gap_pass &= bool(gap_ok)
    return report


def omega(gamma, v, eps2):
    """``((1 + 1/gamma + eps2) v - 1)(gamma + 1)``; exact for rational inputs."""
    if all(isinstance(x, (int, Fraction)) for x in (gamma, v, eps2)):
        gamma, v, eps2 = Fraction(gamma), Fraction(v), Fraction(eps2)
    return ((1 + 1 / gamma + eps2) * v - 1) * (gamma + 1)


@dataclass
class SeriesReport:
    omega: Fraction | float
    v: Fraction
    terms: list[float]
    log10_terms: list[float]
    boundary: bool
    verdict: str

    def to_dict(self) -> dict:
        return {"omega": float(self.omega), "omega_exact": str(self.omega), "v": str(self.v),
                "terms": self.terms, "log10_terms": self.log10_terms,
                "boundary": self.boundary, "verdict": self.verdict}


def series_report(params: SieveParams, seq: GrowthSequence, ladder: Ladder,
                  v=None) -> SeriesReport:
    v = Fraction(params.v if v is None else v)
    if not 0 < v < 1:
        raise DomainError("params: v must lie in (0, 1)")
    if len(ladder) < 3:
        raise DomainError("params: series report needs a ladder of length >= 3")
    om = omega(params.gamma, v, params.eps2)
    logs = []
    with mpmath.workdps(40):
        vv = mpmath.mpf(v.numerator) / v.denominator
        for k in range(2, len(ladder)):
            nk, nprev = ladder[k], ladder[k - 1]
            log_term = (k * mpmath.log(3)
                        + vv * mpmath.log(_t(seq, nk, params).mid) - mpmath.log(_t(seq, nprev, params).mid)
                        - mpmath.log(inv_delta(params, nprev).mid) + vv * mpmath.log(inv_delta(params, nk).mid))
            logs.append(log_term)
        terms = [float(mpmath.exp(x)) for x in logs]
        log10 = [float(x / mpmath.log(10)) for x in logs]
    decreasing = len(logs) < 2 or logs[-1] < logs[-2]
    verdict = "convergent-trend" if om < 0 and decreasing else "inconclusive"
    boundary = v == params.gamma / (params.gamma + 1)
    return SeriesReport(om, v, terms, log10, boundary, verdict)
