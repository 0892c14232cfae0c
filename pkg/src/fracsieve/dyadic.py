"""Dyadic cells and finite unions of them stored as maximal index runs."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from sortedcontainers import SortedDict


@dataclass(frozen=True, order=True)
class DyadicCell:
    """Half-open interval ``[index/2**level, (index+1)/2**level)``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < (1 << self.level):
            raise ValueError(f"invalid dyadic cell level={self.level} index={self.index}")

    @property
    def lo(self) -> Fraction:
        return Fraction(self.index, 1 << self.level)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.level)

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    def span_at(self, level: int) -> tuple[int, int]:
        """Index range ``[lo, hi)`` of the descendants at ``level``."""
        shift = level - self.level
        if shift < 0:
            raise ValueError("span_at needs a level at least as deep as the cell")
        return self.index << shift, (self.index + 1) << shift

    def ancestor(self, level: int) -> "DyadicCell":
        return DyadicCell(level, self.index >> (self.level - level))

    def contains_point(self, x: Fraction) -> bool:
        return self.lo <= x < self.hi

    def to_json(self) -> list[int]:
        return [self.level, self.index]


UNIT = DyadicCell(0, 0)


class DyadicSet:
    """Sorted, disjoint, non-adjacent runs ``[lo, hi)`` of cells at one level."""

    __slots__ = ("level", "_runs", "_count")

    def __init__(self, level: int, runs: Iterable[tuple[int, int]] = ()):
        self.level = level
        self._runs = SortedDict()
        last_lo = last_hi = None
        for lo, hi in sorted(runs):
            if lo >= hi:
                continue
            if lo < 0 or hi > (1 << level):
                raise ValueError(f"run [{lo}, {hi}) outside level {level}")
            if last_hi is not None and lo <= last_hi:
                last_hi = max(last_hi, hi)
                self._runs[last_lo] = last_hi
                continue
            self._runs[lo] = hi
            last_lo, last_hi = lo, hi
        self._count = sum(hi - lo for lo, hi in self._runs.items())

    @classmethod
    def from_cell(cls, cell: DyadicCell, level: int | None = None) -> "DyadicSet":
        level = cell.level if level is None else level
        return cls(level, [cell.span_at(level)])

    @classmethod
    def from_cells(cls, level: int, indices: Iterable[int]) -> "DyadicSet":
        runs: list[list[int]] = []
        for i in sorted(indices):
            if runs and runs[-1][1] >= i:
                runs[-1][1] = max(runs[-1][1], i + 1)
            else:
                runs.append([i, i + 1])
        return cls(level, [tuple(r) for r in runs])

    def copy(self) -> "DyadicSet":
        out = DyadicSet(self.level)
        out._runs = self._runs.copy()
        out._count = self._count
        return out

    # --- queries -----------------------------------------------------------

    def runs(self) -> list[tuple[int, int]]:
        return list(self._runs.items())

    def __len__(self) -> int:
        return len(self._runs)

    def __bool__(self) -> bool:
        return bool(self._runs)

    def cell_count(self) -> int:
        return self._count

    def measure(self) -> Fraction:
        return Fraction(self.cell_count(), 1 << self.level)

    def cells(self) -> Iterator[int]:
        for lo, hi in self._runs.items():
            yield from range(lo, hi)

    def count_in(self, lo: int, hi: int) -> int:
        """Number of member cells with index in ``[lo, hi)``."""
        runs = self._runs
        i = runs.bisect_right(lo)
        if i:
            i -= 1
        total = 0
        keys = runs.keys()
        while i < len(runs):
            a = keys[i]
            if a >= hi:
                break
            b = runs[a]
            total += max(0, min(b, hi) - max(a, lo))
            i += 1
        return total

    def measure_in(self, cell: DyadicCell) -> Fraction:
        lo, hi = cell.span_at(self.level)
        return Fraction(self.count_in(lo, hi), 1 << self.level)

    def contains_cell(self, index: int) -> bool:
        return self.count_in(index, index + 1) == 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadicSet):
            return NotImplemented
        level = max(self.level, other.level)
        return self.refined(level).runs() == other.refined(level).runs()

    def issubset(self, other: "DyadicSet") -> bool:
        level = max(self.level, other.level)
        mine, theirs = self.refined(level), other.refined(level)
        return all(theirs.count_in(lo, hi) == hi - lo for lo, hi in mine.runs())

    def __repr__(self) -> str:
        return f"DyadicSet(level={self.level}, runs={len(self)}, cells={self.cell_count()})"

    # --- mutation ----------------------------------------------------------

    def refine_to(self, level: int) -> None:
        """Re-express the same point set at a deeper level, in place."""
        shift = level - self.level
        if shift < 0:
            raise ValueError(f"cannot coarsen from level {self.level} to {level}")
        if shift:
            self._runs = SortedDict({lo << shift: hi << shift for lo, hi in self._runs.items()})
            self._count <<= shift
            self.level = level

    def refined(self, level: int) -> "DyadicSet":
        out = self.copy()
        out.refine_to(level)
        return out

    def subtract(self, ranges: Iterable[tuple[int, int]]) -> int:
        """Remove sorted index ranges; returns the number of cells removed."""
        runs = self._runs
        keys = runs.keys()
        removed = 0
        for a, b in ranges:
            i = runs.bisect_right(a)
            if i:
                lo = keys[i - 1]
                hi = runs[lo]
                if lo < a and hi > b:
                    # hole strictly inside one run: the common case
                    runs[lo] = a
                    runs[b] = hi
                    removed += b - a
                    continue
                if hi > a:
                    i -= 1
            while i < len(keys):
                lo = keys[i]
                if lo >= b:
                    break
                hi = runs[lo]
                del runs[lo]
                removed += min(hi, b) - max(lo, a)
                if lo < a:
                    runs[lo] = a
                    i += 1
                if hi > b:
                    runs[b] = hi
                    break
        self._count -= removed
        return removed

    # --- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"level": self.level, "runs": [[lo, hi] for lo, hi in self._runs.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "DyadicSet":
        return cls(int(data["level"]), [(int(lo), int(hi)) for lo, hi in data["runs"]])
