"""Measured counterparts of the measure-retention lemmas and the dimension count.

Every measure here is an exact cell count at some dyadic level, so a check
can only be perturbed by the direction in which delta enclosures are used:
the sieve removes with the upper endpoint, ratios are divided by the lower one.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from mpmath import iv

from .dyadic import DyadicCell, DyadicSet
from .enclosure import Enclosure, from_iv, iv_precision
from .errors import CapacityError, DomainError, EmptySurvivors
from .params import (Ladder, SieveParams, c_enclosure, delta, dyadic_level, h)
from .sequence import GrowthSequence
from .sieve import cells_hitting_E, select_cell, sieve_range

DEFAULT_WORK_BUDGET = 50_000_000
DEFAULT_RETENTION = Fraction(5, 6)
LEMMA1_BOUND = 5


@dataclass
class LemmaReport:
    lemma_id: str
    samples: int
    worst_ratio: float | None
    bound: float
    passed: bool | None
    details: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    note: str = ""

    @property
    def status(self) -> str:
        return {True: "pass", False: "fail", None: "inconclusive"}[self.passed]

    def to_dict(self) -> dict:
        return {"lemma_id": self.lemma_id, "samples": self.samples, "worst_ratio": self.worst_ratio,
                "bound": self.bound, "pass": self.passed, "status": self.status,
                "note": self.note, "skipped": len(self.skipped)}


# --- cover ratio -----------------------------------------------------------------

def sample_lemma1(seq: GrowthSequence, params: SieveParams, n_lo: int, n_hi: int,
                  count: int, seed: int = 0) -> list[tuple[int, int, DyadicCell]]:
    """Seeded ``(n, h(n), J)`` triples with J uniform among level-``l_n`` cells."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(n_lo, n_hi)
        ln = dyadic_level(params, seq, n)
        out.append((n, h(params, seq, n), DyadicCell(ln, rng.randrange(1 << ln))))
    return out


def lemma1_check(seq: GrowthSequence, params: SieveParams,
                 samples: list[tuple[int, int, DyadicCell]]) -> LemmaReport:
    """Worst ``mu(J & A_m) / (delta_m mu(J))`` over the samples, against 5."""
    details = []
    worst = Fraction(0)
    for n, m, cell in samples:
        if m < h(params, seq, n):
            raise DomainError(f"validate: cover-ratio sample needs m >= h({n}), got m={m}")
        if cell.level != dyadic_level(params, seq, n):
            raise DomainError(f"validate: J must sit at level l_{n}")
        lm = dyadic_level(params, seq, m)
        hit = sum(b - a for a, b in cells_hitting_E(seq, params, m, cell))
        ratio = Fraction(hit, 1 << lm) / (delta(params, m).lo * cell.measure)
        worst = max(worst, ratio)
        details.append({"n": n, "m": m, "l_n": cell.level, "l_m": lm, "J": cell.index,
                        "cells_hit": hit, "ratio": float(ratio),
                        "grid_points_per_J": float(seq.approx(m)) / (1 << cell.level)})
    passed = worst <= LEMMA1_BOUND if samples else None
    return LemmaReport("L1", len(samples), float(worst) if samples else None, LEMMA1_BOUND,
                       passed, details)


# --- retention and good children ---------------------------------------------------------

@dataclass
class CellSample:
    """One stage-n cell J followed from stage m to stage M.

    ``child_kept[i]`` is the number of level-``level_M`` survivor cells inside
    the i-th stage-m survivor child of J.
    """

    cell: DyadicCell
    mu_m: Fraction
    mu_M: Fraction | None
    hypothesis: bool
    level_m: int
    level_M: int = 0
    child_kept: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def retention(self) -> Fraction | None:
        if not self.hypothesis or self.mu_M is None:
            return None
        return self.mu_M / self.mu_m

    @property
    def r(self) -> int:
        return len(self.child_kept)

    @property
    def good(self) -> int:
        # kept / 2**shift >= 1/2
        shift = self.level_M - self.level_m
        return int(np.count_nonzero(2 * self.child_kept >= (1 << shift)))


def step_work(seq: GrowthSequence, lo: int, hi: int, width: float) -> float:
    """Rough count of grid points visited when sieving one window over ``lo..hi``."""
    if hi < lo:
        return 0.0
    total = 0.0
    for start in range(lo, hi + 1, 1 << 22):
        stop = min(hi, start + (1 << 22) - 1)
        j = np.arange(start, stop + 1, dtype=np.float64)
        if seq.kind == "polynomial":
            t = np.zeros_like(j)
            for c in seq.coefficients:
                t = t * j + float(c)
        else:
            t = j ** float(seq.gamma)
        total += float(np.sum(t * width + 3.0))
    return total


def _retention_bound(params: SieveParams, m: int, M: int) -> float:
    if params.c_mode == "paper":
        return float(DEFAULT_RETENTION)
    return retention_bound(params, math.log(M) / math.log(m))


def retention_bound(params: SieveParams, log_ratio: float) -> float:
    """``1 - (10/c) ln(log_ratio)``; equals 5/6 at c = 60 ln(2 + 1/gamma) and ratio 2 + 1/gamma."""
    return 1 - 10 / float(c_enclosure(params).mid) * math.log(log_ratio)


def ladder_step_samples(seq: GrowthSequence, params: SieveParams, step: tuple[int, int, int],
                        window: DyadicCell, count: int = 4, seed: int = 0,
                        work_budget: float = DEFAULT_WORK_BUDGET) -> list[CellSample]:
    """Follow up to ``count`` stage-n survivor cells J of ``window`` through stages m and M.

    J is drawn from the real survivor set B_n of the window (leftmost first,
    then seeded-random picks), never synthesized.
    """
    n, m, M = step
    if not n < m <= M:
        raise DomainError(f"validate: ladder step must satisfy n < m <= M, got {step}")
    ln = dyadic_level(params, seq, n)
    width = 1.0 / (1 << ln)
    work = step_work(seq, n + 1, M, width)
    if work > work_budget:
        raise CapacityError(
            f"validate: step {step} needs ~{work:.3g} grid-point evaluations per J "
            f"(budget {work_budget:.3g}); stage-{n} cells have width 2^-{ln}")
    if params.n_start <= n:
        base = sieve_range(seq, params, window, params.n_start, n).survivors
    else:
        base = DyadicSet.from_cell(window)
    base.refine_to(ln)
    rng = random.Random(seed)
    picks: list[int] = []
    for k in range(min(count, base.cell_count())):
        idx = select_cell(base, "leftmost" if k == 0 else "seeded-random", rng.randrange(1 << 30))
        if idx not in picks:
            picks.append(idx)
    return [_follow(seq, params, DyadicCell(ln, idx), n, m, M) for idx in picks]


def _follow(seq, params, cell: DyadicCell, n: int, m: int, M: int) -> CellSample:
    lm = dyadic_level(params, seq, m)
    try:
        state = sieve_range(seq, params, cell, n + 1, m)
    except EmptySurvivors:
        return CellSample(cell, Fraction(0), None, False, lm)
    b_m = state.survivors.copy()
    mu_m = b_m.measure()
    if mu_m < cell.measure / 2:
        return CellSample(cell, mu_m, None, False, lm)
    if M > m:
        try:
            b_M = sieve_range(seq, params, cell, m + 1, M, state=state).survivors
        except EmptySurvivors:
            b_M = DyadicSet(dyadic_level(params, seq, M))
    else:
        b_M = b_m
    kept = child_counts(b_m, b_M, cell)
    return CellSample(cell, mu_m, b_M.measure(), True, lm, b_M.level, kept)


def child_counts(coarse: DyadicSet, fine: DyadicSet, cell: DyadicCell) -> np.ndarray:
    """For each member cell of ``coarse`` inside ``cell``, the number of ``fine`` cells in it."""
    shift = fine.level - coarse.level
    base = cell.index << (coarse.level - cell.level)
    size = 1 << (coarse.level - cell.level)
    member = np.zeros(size, dtype=bool)
    for lo, hi in coarse.runs():
        member[lo - base:hi - base] = True
    partial = np.zeros(size + 1, dtype=np.int64)
    full = np.zeros(size + 1, dtype=np.int64)
    for lo, hi in fine.runs():
        k0, k1 = (lo >> shift) - base, ((hi - 1) >> shift) - base
        if k0 == k1:
            partial[k0] += hi - lo
            continue
        partial[k0] += ((k0 + base + 1) << shift) - lo
        partial[k1] += hi - ((k1 + base) << shift)
        full[k0 + 1] += 1
        full[k1] -= 1
    kept = partial[:size] + (np.cumsum(full)[:size] << shift)
    return kept[member]


def lemma2_check(seq: GrowthSequence, params: SieveParams, step: tuple[int, int, int],
                 window: DyadicCell, samples: list[CellSample] | None = None,
                 **kwargs) -> LemmaReport:
    """Retention ``mu(J & B_M) / mu(J & B_m)`` against 5/6 (or the custom-c bound)."""
    if samples is None:
        samples = ladder_step_samples(seq, params, step, window, **kwargs)
    n, m, M = step
    bound = _retention_bound(params, m, M)
    details, skipped = [], []
    worst = None
    for s in samples:
        rec = {"J": s.cell.index, "l_n": s.cell.level, "mu_J_Bm_over_mu_J": float(s.mu_m / s.cell.measure)}
        if not s.hypothesis:
            skipped.append(rec)
            continue
        r = s.retention
        rec["retention"] = float(r)
        details.append(rec)
        worst = r if worst is None else min(worst, r)
    passed = None if worst is None else worst >= bound
    note = "" if details else "hypothesis mu(J & B_m) >= mu(J)/2 never satisfied"
    return LemmaReport("L2", len(details), None if worst is None else float(worst), bound,
                       passed, details, skipped, note)


def lemma3_threshold(params: SieveParams, r: int, retention: float | None = None) -> int:
    if params.c_mode == "paper" or retention is None:
        return (2 * r) // 3
    return max(0, math.floor((2 * retention - 1) * r))


def lemma3_check(seq: GrowthSequence, params: SieveParams, step: tuple[int, int, int],
                 window: DyadicCell, samples: list[CellSample] | None = None,
                 **kwargs) -> LemmaReport:
    """Number of stage-m children keeping at least half their measure at stage M."""
    if samples is None:
        samples = ladder_step_samples(seq, params, step, window, **kwargs)
    n, m, M = step
    rc = _retention_bound(params, m, M)
    details, skipped = [], []
    worst = None
    ok = True
    for s in samples:
        r = s.r
        if not s.hypothesis or r == 0:
            skipped.append({"J": s.cell.index, "r": r})
            continue
        good = s.good
        need = lemma3_threshold(params, r, rc)
        ok &= good >= need
        frac = good / r
        worst = frac if worst is None else min(worst, frac)
        details.append({"J": s.cell.index, "r": r, "good": good, "bad": r - good,
                        "required": need, "pass": good >= need})
    passed = None if worst is None else ok
    bound = 2 / 3 if params.c_mode == "paper" else 2 * rc - 1
    return LemmaReport("L3", len(details), worst, bound, passed, details, skipped,
                       "" if details else "no sample with r > 0 satisfying the hypothesis")


# --- certified bounds for steps too long to sieve ------------------------------------

def _power_sum(k: int, lo: int, hi: int) -> int:
    """``sum_{j=lo}^{hi} j**k`` exactly."""
    def upto(n: int) -> int:
        # S_k(n) = ((n+1)^(k+1) - 1 - sum_{i<k} C(k+1, i) S_i(n)) / (k+1)
        sums = []
        for e in range(k + 1):
            acc = (n + 1) ** (e + 1) - 1 - sum(math.comb(e + 1, i) * sums[i] for i in range(e))
            sums.append(acc // (e + 1))
        return sums[k]
    return upto(hi) - upto(lo - 1)


def _t_sum(seq: GrowthSequence, lo: int, hi: int) -> Fraction:
    d = len(seq.coefficients) - 1
    return sum((c * _power_sum(d - i, lo, hi) for i, c in enumerate(seq.coefficients)), Fraction(0))


def _level_blocks(params: SieveParams, seq: GrowthSequence, lo: int, hi: int):
    """Maximal runs ``(a, b, l)`` of stages in ``[lo, hi]`` sharing the level ``l``."""
    a = lo
    while a <= hi:
        level = dyadic_level(params, seq, a)
        b_lo, b_hi = a, hi
        while b_lo < b_hi:
            mid = (b_lo + b_hi + 1) // 2
            if dyadic_level(params, seq, mid) == level:
                b_lo = mid
            else:
                b_hi = mid - 1
        yield a, b_lo, level
        a = b_lo + 1


def removed_measure_bound(seq: GrowthSequence, params: SieveParams, cell: DyadicCell,
                          m: int, M: int) -> Fraction:
    """Upper bound on the measure removed inside ``cell`` by stages ``m+1..M``.

    At stage j at most ``t_j mu(J) + 3`` segments meet J, and a segment of
    length ``s`` cells touches at most ``floor(s) + 2`` of them.  Within a block
    of equal level, ``s`` is largest at the first stage since ``delta_j / t_j``
    decreases.  Exact; polynomial sequences only.
    """
    if seq.kind != "polynomial":
        raise DomainError("validate: removed_measure_bound needs a polynomial sequence")
    total = Fraction(0)
    for a, b, level in _level_blocks(params, seq, m + 1, M):
        s = 2 * delta(params, a).hi * (1 << level) / seq.exact(a)
        per_segment = math.floor(s) + 2
        segments = _t_sum(seq, a, b) * cell.measure + 3 * (b - a + 1)
        total += per_segment * segments / (1 << level)
    return total


def certified_step_check(seq: GrowthSequence, params: SieveParams, step: tuple[int, int, int],
                         window: DyadicCell, count: int = 4, seed: int = 0,
                         work_budget: float = DEFAULT_WORK_BUDGET) -> tuple[LemmaReport, LemmaReport]:
    """Retention and good-children lower bounds for a full ladder step.

    J and its stage-m survivors are computed exactly; the loss over
    ``(m, M]`` is replaced by :func:`removed_measure_bound`.  A child is bad
    only if it loses more than half its measure, so at most
    ``floor(2 * loss / w_m)`` children are bad.
    """
    n, m, M = step
    samples = ladder_step_samples(seq, params, (n, m, m), window, count, seed, work_budget)
    bound = _retention_bound(params, m, M)
    l2, l3, skipped = [], [], []
    for s in samples:
        if not s.hypothesis or s.r == 0:
            skipped.append({"J": s.cell.index})
            continue
        loss = removed_measure_bound(seq, params, s.cell, m, M)
        retention = max(Fraction(0), 1 - loss / s.mu_m)
        bad = min(s.r, math.floor(2 * loss * (1 << s.level_m)))
        need = lemma3_threshold(params, s.r, bound)
        l2.append({"J": s.cell.index, "mu_J_Bm_over_mu_J": float(s.mu_m / s.cell.measure),
                   "loss_bound_over_mu_J": float(loss / s.cell.measure),
                   "retention_lower_bound": float(retention), "pass": retention >= bound})
        l3.append({"J": s.cell.index, "r": s.r, "bad_upper_bound": bad, "good_lower_bound": s.r - bad,
                   "required": need, "pass": s.r - bad >= need})
    worst2 = min((d["retention_lower_bound"] for d in l2), default=None)
    worst3 = min((d["good_lower_bound"] / d["r"] for d in l3), default=None)
    note = f"bounds over ({m}, {M}]"
    rep2 = LemmaReport("L2-bound", len(l2), worst2, bound,
                       None if not l2 else all(d["pass"] for d in l2), l2, skipped, note)
    rep3 = LemmaReport("L3-bound", len(l3), worst3, 2 / 3 if params.c_mode == "paper" else 2 * bound - 1,
                       None if not l3 else all(d["pass"] for d in l3), l3, skipped, note)
    return rep2, rep3


# --- budget -----------------------------------------------------------------

def delta_sum(params: SieveParams, m: int, M: int) -> Enclosure:
    """Enclosure of ``sum_{j=m+1}^{M} delta_j``."""
    total = 0.0
    for start in range(m + 1, M + 1, 1 << 22):
        j = np.arange(start, min(M, start + (1 << 22) - 1) + 1, dtype=np.float64)
        total = math.fsum([total, math.fsum(1.0 / (j * np.log(j)))])
    # each float term carries a few ulps of relative error; fsum adds none
    s = Fraction(total)
    rel = Fraction(1, 10**12)
    inv_c = c_enclosure(params).reciprocal()
    return Enclosure(s * (1 - rel) * inv_c.lo, s * (1 + rel) * inv_c.hi)


def budget_check(params: SieveParams, m: int, M: int) -> LemmaReport:
    """Sum of delta_j over (m, M] against ``(1/c) ln(ln M / ln m)``."""
    if not 2 <= m < M:
        raise DomainError(f"validate: budget check needs 2 <= m < M, got ({m}, {M})")
    s = delta_sum(params, m, M)
    with iv_precision(params.precision):
        ratio = from_iv(iv.log(iv.log(M) / iv.log(m)))
    bound = c_enclosure(params).reciprocal() * ratio
    passed = s.hi <= bound.lo
    retention = 1 - 10 * float(s.mid)
    return LemmaReport("budget", M - m, float(s.mid), float(bound.mid), passed,
                       [{"m": m, "M": M, "sum_lo": float(s.lo), "sum_hi": float(s.hi),
                         "bound": float(bound.mid), "retention_constant": retention,
                         "retention_from_bound": 1 - 10 * float(bound.mid)}])


# --- Eggleston ------------------------------------------------------------------

@dataclass
class DimensionEstimate:
    ladder: Ladder
    levels: list[int]
    counts: list[int]
    D: list[float]
    log2_R: list[float]
    series_log2_terms: list[float]
    nu: float
    valid: bool = True
    invalid_k: int | None = None

    def to_dict(self) -> dict:
        return {"ladder": list(self.ladder.entries), "levels": self.levels,
                "counts": [str(c) for c in self.counts], "D": self.D, "log2_R": self.log2_R,
                "series_log2_terms": self.series_log2_terms, "nu": self.nu,
                "valid": self.valid, "invalid_k": self.invalid_k}

    def csv(self) -> str:
        rows = ["k,n_k,l_nk,N_k,D_k"]
        rows.append(f"0,{self.ladder[0]},{self.levels[0]},,")
        for k in range(1, len(self.levels)):
            rows.append(f"{k},{self.ladder[k]},{self.levels[k]},{self.counts[k - 1]},{self.D[k - 1]!r}")
        return "\n".join(rows) + "\n"


def guaranteed_counts(levels: list[int]) -> list[int]:
    """``N_{k+1} = floor(2**(l_{k+1} - l_k) / 3)``."""
    return [(1 << (b - a)) // 3 if b >= a else 0 for a, b in zip(levels, levels[1:])]


def dimension_sequence(levels: list[int], counts: list[int]) -> list[float]:
    """``D_k = sum_{j<=k} log2 N_j / l_{n_k}``, for k = 1..K."""
    out, acc = [], 0.0
    for k, count in enumerate(counts, start=1):
        acc += math.log2(count) if count > 0 else -math.inf
        out.append(acc / levels[k])
    return out


def eggleston_estimate(seq: GrowthSequence, params: SieveParams, ladder: Ladder,
                       nu=None) -> DimensionEstimate:
    if len(ladder) < 2:
        raise DomainError("validate: Eggleston estimate needs a ladder of length >= 2")
    nu = float(params.v if nu is None else nu)
    levels = [dyadic_level(params, seq, n) for n in ladder.entries]
    counts = guaranteed_counts(levels)
    bad = next((k for k, c in enumerate(counts, start=1) if c <= 1), None)
    D = dimension_sequence(levels, counts)
    log2_R, acc = [], 0.0
    for c in counts:
        acc += math.log2(c) if c > 0 else -math.inf
        log2_R.append(acc)
    terms = [(levels[k] - levels[k - 1]) - log2_R[k - 1] + nu * levels[k]
             for k in range(2, len(levels))]
    return DimensionEstimate(ladder, levels, counts, D, log2_R, terms, nu, bad is None, bad)
