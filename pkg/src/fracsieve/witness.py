"""Explicit witnesses alpha and their exact finite-range certificates.

``certify`` deliberately recomputes its own enclosures of ``c`` and
``n ln n`` straight from ``mpmath.iv`` instead of reusing the sieve's
parameter cache, and never looks at survivor data, so a passing certificate
re-verifies the whole sieve end to end.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from mpmath import iv

from .dyadic import DyadicCell
from .enclosure import Enclosure, from_iv, iv_precision, iv_rational
from .errors import DomainError, EmptySurvivors
from .params import C_FACTOR, SieveParams
from .sequence import GrowthSequence, parse_sequence
from .sieve import SurvivorState, select_cell

CERT_PRECISION = 160


@dataclass(frozen=True)
class DyadicRational:
    numerator: int
    level: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.numerator <= (1 << self.level):
            raise DomainError(f"witness: {self.numerator}/2^{self.level} outside [0, 1]")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.level)

    def to_json(self) -> dict:
        return {"num": str(self.numerator), "level": self.level}

    @classmethod
    def from_json(cls, data: dict) -> "DyadicRational":
        return cls(int(data["num"]), int(data["level"]))


def _dist(x: Fraction) -> Fraction:
    r = x - (x.numerator // x.denominator)
    return min(r, 1 - r)


def fractional_distance(alpha, t):
    """``||alpha * t||``: exact for a rational ``t``, an enclosure for an enclosure."""
    a = alpha.value if isinstance(alpha, DyadicRational) else Fraction(alpha)
    if not isinstance(t, Enclosure):
        return _dist(a * Fraction(t))
    if t.is_point:
        return Enclosure.point(_dist(a * t.lo))
    x_lo, x_hi = sorted((a * t.lo, a * t.hi))
    ends = (_dist(x_lo), _dist(x_hi))
    floor_lo = x_lo.numerator // x_lo.denominator
    crosses_int = x_hi >= floor_lo + 1 or x_lo == floor_lo
    crosses_half = x_lo <= floor_lo + Fraction(1, 2) <= x_hi or x_hi >= floor_lo + Fraction(3, 2)
    lower = Fraction(0) if crosses_int else min(ends)
    upper = Fraction(1, 2) if crosses_half else max(ends)
    return Enclosure(lower, upper)


def extract_witness(state: SurvivorState, strategy: str = "leftmost",
                    seed: int = 0) -> tuple[DyadicRational, list[DyadicCell]]:
    """Midpoint of a chosen final survivor cell plus its nested cell chain."""
    if not state.survivors:
        raise EmptySurvivors(state.processed_up_to, state)
    b = select_cell(state.survivors, strategy, seed)
    final = DyadicCell(state.level, b)
    alpha = DyadicRational(2 * b + 1, state.level + 1)
    return alpha, list(state.path) + [final]


@dataclass
class WitnessCertificate:
    alpha: DyadicRational
    sequence: str
    gamma: Fraction
    c_mode: str
    c_value: Fraction | None
    n_from: int
    n_to: int
    scores: list[tuple[int, Fraction]]
    min_score: Fraction
    argmin_n: int
    target: Enclosure
    verdict: bool
    failures: list[int] = field(default_factory=list)
    chain: list[DyadicCell] = field(default_factory=list)

    def scores_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "score_lower_bound", "score_decimal"])
        for n, s in self.scores:
            writer.writerow([n, f"{s.numerator}/{s.denominator}", repr(float(s))])
        return buf.getvalue()

    def to_json(self, scores_csv_path: str | None = None) -> dict:
        return {
            "alpha": self.alpha.to_json(),
            "alpha_decimal": repr(float(self.alpha.value)),
            "sequence": self.sequence,
            "gamma": str(self.gamma),
            "c_mode": self.c_mode,
            "c_value": None if self.c_value is None else str(self.c_value),
            "n_from": self.n_from,
            "n_to": self.n_to,
            "min_score": str(self.min_score),
            "min_score_decimal": repr(float(self.min_score)),
            "argmin_n": self.argmin_n,
            "target_1_over_c": {"lo": str(self.target.lo), "hi": str(self.target.hi),
                                "decimal": repr(float(self.target.mid))},
            "verdict": self.verdict,
            "failures": self.failures[:100],
            "chain": [c.to_json() for c in self.chain],
            "scores_csv_path": scores_csv_path,
        }


def _c_iv_indep(gamma: Fraction, c_mode: str, c_value):
    if c_mode == "custom":
        return iv_rational(c_value)
    return C_FACTOR * iv.log(2 + iv_rational(1 / gamma))


def _score_chunk(args) -> tuple[list[tuple[int, Fraction]], list[int]]:
    alpha, seq, gamma, c_mode, c_value, lo, hi = args
    scores, failures = [], []
    with iv_precision(CERT_PRECISION):
        c = from_iv(_c_iv_indep(gamma, c_mode, c_value))
        for n in range(lo, hi + 1):
            nlogn = from_iv(iv.mpf(n) * iv.log(n))
            t = seq._eval_unchecked(n, CERT_PRECISION)
            d = fractional_distance(alpha, t)
            d_lo = d.lo if isinstance(d, Enclosure) else d
            scores.append((n, d_lo * nlogn.lo))
            # ||alpha t|| > delta_n  <=>  d * c * n ln n > 1, checked against the lower endpoints
            if not d_lo * c.lo * nlogn.lo > 1:
                failures.append(n)
    return scores, failures


def certify(alpha: DyadicRational, seq: GrowthSequence, params: SieveParams,
            n_from: int, n_to: int, threads: int = 1,
            chain: list[DyadicCell] | None = None) -> WitnessCertificate:
    if n_from < 2:
        raise DomainError("witness: n_from must be >= 2")
    if n_to < n_from:
        raise DomainError("witness: empty n range")
    base = (alpha, seq, params.gamma, params.c_mode, params.c_value)
    if threads > 1 and n_to - n_from > 2000:
        step = -(-(n_to - n_from + 1) // threads)
        chunks = [base + (lo, min(lo + step - 1, n_to)) for lo in range(n_from, n_to + 1, step)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_score_chunk, chunks))
    else:
        parts = [_score_chunk(base + (n_from, n_to))]
    scores = [s for part in parts for s in part[0]]
    failures = [n for part in parts for n in part[1]]
    argmin_n, min_score = min(scores, key=lambda item: (item[1], item[0]))
    with iv_precision(CERT_PRECISION):
        target = from_iv(1 / _c_iv_indep(params.gamma, params.c_mode, params.c_value))
    return WitnessCertificate(alpha, seq.spec, params.gamma, params.c_mode, params.c_value,
                              n_from, n_to, scores, min_score, argmin_n, target,
                              not failures, failures, list(chain or []))


def write_certificate(cert: WitnessCertificate, out_dir: Path,
                      stem: str = "certificate") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}_scores.csv"
    csv_path.write_text(cert.scores_csv())
    json_path = out_dir / f"{stem}.json"
    json_path.write_text(json.dumps(cert.to_json(csv_path.name), indent=2, sort_keys=True) + "\n")
    return json_path, csv_path


def recertify(path: Path, threads: int = 1, n_min: int = 2) -> WitnessCertificate:
    """Re-run :func:`certify` from a certificate JSON file alone."""
    data = json.loads(Path(path).read_text())
    seq = parse_sequence(data["sequence"], n_min=n_min)
    c_value = data.get("c_value")
    params = SieveParams(gamma=Fraction(data["gamma"]), c_mode=data["c_mode"],
                         c_value=None if c_value is None else Fraction(c_value))
    chain = [DyadicCell(lvl, idx) for lvl, idx in data.get("chain", [])]
    return certify(DyadicRational.from_json(data["alpha"]), seq, params,
                   int(data["n_from"]), int(data["n_to"]), threads, chain)
