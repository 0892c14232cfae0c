"""Forbidden sets E_n, their dyadic covers A_n, and the survivor sets B_n.

The survivor region is tracked inside a dyadic *window* as a
:class:`~fracsieve.dyadic.DyadicSet` at the current level ``l_n``.  A cell is
removed at stage ``n`` when its open interior meets one of the closed
segments ``[(a - delta_n)/t_n, (a + delta_n)/t_n]``; the upper endpoint of the
delta enclosure is used, so the removed set always contains the true cover.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .dyadic import UNIT, DyadicCell, DyadicSet
from .enclosure import Enclosure, ceil_frac, floor_frac
from .errors import CapacityError, DomainError, EmptySurvivors
from .params import SieveParams, delta, dyadic_level
from .sequence import GrowthSequence, check_increasing

DEFAULT_MAX_RUNS = 5_000_000
DEFAULT_WINDOW_LEVEL = 20
BRUTE_FORCE_MAX_LEVEL = 25
STRATEGIES = ("leftmost", "max-run", "seeded-random")


def mark_cells(t: Enclosure, delta_hi: Fraction, level: int,
               window: DyadicCell = UNIT) -> list[tuple[int, int]]:
    """Level-``level`` cells in ``window`` whose interior meets a segment of E.

    Returns merged half-open index runs.  Only grid points ``a/t`` near the
    window are visited, so the cost is ``O(t * |window| + 1)``.
    """
    if level < window.level:
        raise DomainError(f"sieve: level {level} shallower than window level {window.level}")
    w_lo, w_hi = window.span_at(level)
    a_max = ceil_frac(t.hi)
    a_lo = max(0, floor_frac(t.lo * window.lo) - 1)
    a_hi = min(a_max, ceil_frac(t.hi * window.hi) + 1)
    out: list[tuple[int, int]] = []
    if t.is_point:
        p, q = t.lo.numerator, t.lo.denominator
        dn, dd = delta_hi.numerator, delta_hi.denominator
        scale = q << level
        den = dd * p
        for a in range(a_lo, a_hi + 1):
            base = a * dd
            first = ((base - dn) * scale) // den
            stop = -((-(base + dn) * scale) // den)
            first, stop = max(first, w_lo), min(stop, w_hi)
            if first < stop:
                out.append((first, stop))
    else:
        two_l = 1 << level
        for a in range(a_lo, a_hi + 1):
            left = a - delta_hi
            left = left / t.hi if left >= 0 else left / t.lo
            right = (a + delta_hi) / t.lo
            first = max(floor_frac(left * two_l), w_lo)
            stop = min(ceil_frac(right * two_l), w_hi)
            if first < stop:
                out.append((first, stop))
    return _merge(out)


def _merge(ranges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    ranges.sort()
    merged: list[tuple[int, int]] = []
    for lo, hi in ranges:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def cells_hitting_E(seq: GrowthSequence, params: SieveParams, n: int,
                    window: DyadicCell = UNIT) -> list[tuple[int, int]]:
    """Cover of E_n by level-``l_n`` cells, restricted to ``window``."""
    level = dyadic_level(params, seq, n)
    t = seq._eval_unchecked(n, params.precision)
    return mark_cells(t, delta(params, n).hi, level, window)


class StageStat(NamedTuple):
    n: int
    level: int
    delta: float
    cells_removed: int
    survivor_measure: Fraction


@dataclass
class SurvivorState:
    window: DyadicCell
    processed_up_to: int
    survivors: DyadicSet
    stats: list[StageStat] = field(default_factory=list)
    path: list[DyadicCell] = field(default_factory=list)

    @property
    def level(self) -> int:
        return self.survivors.level

    def stats_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "l_n", "delta_n", "cells_removed", "survivor_measure"])
        for s in self.stats:
            writer.writerow([s.n, s.level, repr(s.delta), s.cells_removed,
                             repr(float(s.survivor_measure))])
        return buf.getvalue()

    def snapshot(self) -> dict:
        return {"window": self.window.to_json(), "processed_up_to": self.processed_up_to,
                "path": [c.to_json() for c in self.path], "survivors": self.survivors.to_json()}


def start_state(window: DyadicCell, n_from: int) -> SurvivorState:
    return SurvivorState(window, n_from - 1, DyadicSet.from_cell(window), path=[window])


def subtract_step(state: SurvivorState, seq: GrowthSequence, params: SieveParams, n: int,
                  max_runs: int = DEFAULT_MAX_RUNS) -> SurvivorState:
    """Advance ``state`` by one stage in place and return it."""
    if n != state.processed_up_to + 1:
        raise DomainError(f"sieve: expected stage {state.processed_up_to + 1}, got {n}")
    check_increasing(seq, n)
    level = dyadic_level(params, seq, n)
    if level < state.window.level:
        raise DomainError(f"sieve: l_{n}={level} shallower than window level {state.window.level}")
    state.survivors.refine_to(max(level, state.survivors.level))
    removed = state.survivors.subtract(cells_hitting_E(seq, params, n, state.window))
    state.processed_up_to = n
    state.stats.append(StageStat(n, level, float(delta(params, n).mid), removed,
                                 state.survivors.measure()))
    if not state.survivors:
        raise EmptySurvivors(n, state)
    if len(state.survivors) > max_runs:
        raise CapacityError(f"sieve: {len(state.survivors)} runs at n={n} exceed max_runs={max_runs};"
                            " use a narrower window")
    return state


def sieve_range(seq: GrowthSequence, params: SieveParams, window: DyadicCell,
                n_from: int, n_to: int, max_runs: int = DEFAULT_MAX_RUNS,
                state: SurvivorState | None = None) -> SurvivorState:
    """Sieve ``window`` through stages ``n_from..n_to``.

    Pass ``state`` to continue an existing run (its ``processed_up_to`` must be
    ``n_from - 1``).
    """
    if n_from < max(2, seq.n_min):
        raise DomainError(f"sieve: n_from={n_from} below max(2, n_min)")
    if state is None:
        if n_to >= n_from and window.level > dyadic_level(params, seq, n_from):
            raise DomainError(f"sieve: window level {window.level} deeper than l_{n_from}")
        state = start_state(window, n_from)
    for n in range(n_from, n_to + 1):
        subtract_step(state, seq, params, n, max_runs)
    return state


def select_cell(survivors: DyadicSet, strategy: str = "leftmost", seed: int = 0) -> int:
    """Pick one member cell index of a non-empty set."""
    if not survivors:
        raise EmptySurvivors(-1)
    runs = survivors.runs()
    if strategy == "leftmost":
        return runs[0][0]
    if strategy == "max-run":
        lo, hi = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
        return (lo + hi - 1) // 2
    if strategy == "seeded-random":
        k = random.Random(seed).randrange(survivors.cell_count())
        for lo, hi in runs:
            if k < hi - lo:
                return lo + k
            k -= hi - lo
    raise DomainError(f"sieve: unknown strategy {strategy!r}")


def zoom(state: SurvivorState, strategy: str = "leftmost", seed: int = 0) -> SurvivorState:
    """New state whose window is one survivor cell at the current level."""
    cell = DyadicCell(state.level, select_cell(state.survivors, strategy, seed))
    return SurvivorState(cell, state.processed_up_to, DyadicSet.from_cell(cell),
                         list(state.stats), state.path + [cell])


def auto_window(seq: GrowthSequence, params: SieveParams, n_from: int,
                level: int = DEFAULT_WINDOW_LEVEL, attempt: int = 0) -> DyadicCell:
    """Deterministic default window: the cell containing frac((attempt+1)*phi)."""
    w = min(level, dyadic_level(params, seq, n_from))
    # floor(2**w * frac(k * (sqrt(5) - 1) / 2)) with exact integer sqrt
    k = attempt + 1
    scaled = (k * math.isqrt(5 << (2 * w)) - k * (1 << w)) // 2
    return DyadicCell(w, scaled % (1 << w))


def brute_force_survivors(seq: GrowthSequence, params: SieveParams, n_from: int, n_to: int,
                          level_cap: int = BRUTE_FORCE_MAX_LEVEL) -> DyadicSet:
    """Survivors over all of [0, 1) by testing every cell against every stage.

    For each cell ``b`` at level ``l`` the only grid point that can meet its
    interior first is ``a* = floor(b t / 2**l - delta) + 1``; the cell is hit
    iff ``a* <= ceil(t)`` and ``a* < (b+1) t / 2**l + delta``.  Polynomial
    sequences only.
    """
    if seq.kind != "polynomial":
        raise DomainError("sieve: brute force oracle supports polynomial sequences only")
    if level_cap > BRUTE_FORCE_MAX_LEVEL:
        raise CapacityError(f"sieve: level_cap {level_cap} > {BRUTE_FORCE_MAX_LEVEL}")
    final = dyadic_level(params, seq, n_to)
    if final > level_cap:
        raise CapacityError(f"sieve: l_{n_to}={final} exceeds level_cap={level_cap}")
    hits: dict[int, np.ndarray] = {}
    for j in range(n_from, n_to + 1):
        lvl = dyadic_level(params, seq, j)
        t = seq.exact(j)
        p, q = t.numerator, t.denominator
        d = delta(params, j).hi
        dn, dd = d.numerator, d.denominator
        shift = dn * q << lvl
        den = dd * q << lvl
        b = np.arange(1 << lvl, dtype=np.int64).astype(object)
        a_star = (b * (p * dd) - shift) // den + 1
        a_star = np.where(a_star < 0, 0, a_star)
        hit = ((a_star * den < (b + 1) * (p * dd) + shift) & (a_star <= ceil_frac(t))).astype(bool)
        hits[lvl] = hits[lvl] | hit if lvl in hits else hit
    idx = np.arange(1 << final, dtype=np.int64)
    alive = np.ones(1 << final, dtype=bool)
    for lvl, hit in hits.items():
        alive &= ~hit[idx >> (final - lvl)]
    edges = np.flatnonzero(np.diff(np.concatenate(([0], alive.astype(np.int8), [0]))))
    return DyadicSet(final, [(int(lo), int(hi)) for lo, hi in zip(edges[::2], edges[1::2])])
