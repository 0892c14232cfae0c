"""Flat ``key=value`` run configuration."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .dyadic import DyadicCell
from .errors import ConfigError, SieveError
from .params import SieveParams
from .sequence import GrowthSequence, parse_sequence


@dataclass
class RunConfig:
    sequence: str = "poly:1,0,0"
    n_min: int = 2
    gamma: Optional[Fraction] = None
    c_mode: str = "paper"
    c_value: Optional[Fraction] = None
    h_mode: str = "effective"
    n_start: int = 32
    eps2: Fraction = Fraction(1, 100)
    v: Fraction = Fraction(3, 5)
    ladder_depth: int = 3
    index_cap: int = 10**15
    precision: int = 128
    window: str = "auto"
    window_level: int = 20
    n_from: Optional[int] = None
    n_to: int = 10_000
    strategy: str = "leftmost"
    seed: int = 0
    max_runs: int = 5_000_000
    alpha: Optional[str] = None
    l1_samples: int = 100
    l1_n_lo: int = 32
    l1_n_hi: int = 200
    l23_samples: int = 4
    l23_M_cap: Optional[int] = None
    work_budget: float = 5e7

    @property
    def start(self) -> int:
        return self.n_start if self.n_from is None else self.n_from

    def build_sequence(self) -> GrowthSequence:
        try:
            return parse_sequence(self.sequence, self.n_min)
        except SieveError as exc:
            raise ConfigError(f"config: sequence: {exc}") from exc

    def build_params(self, seq: GrowthSequence) -> SieveParams:
        if self.gamma is not None and self.gamma != seq.gamma:
            raise ConfigError(f"config: gamma={self.gamma} disagrees with sequence gamma={seq.gamma}")
        try:
            return SieveParams(gamma=seq.gamma, c_mode=self.c_mode, c_value=self.c_value,
                               h_mode=self.h_mode, n_start=self.n_start, eps2=self.eps2, v=self.v,
                               index_cap=self.index_cap, precision=self.precision)
        except SieveError as exc:
            raise ConfigError(f"config: params: {exc}") from exc

    def explicit_window(self) -> DyadicCell | None:
        if self.window == "auto":
            return None
        try:
            level, index = (int(x) for x in self.window.split(":"))
            return DyadicCell(level, index)
        except ValueError as exc:
            raise ConfigError(f"config: window must be 'auto' or 'level:index', got {self.window!r}") from exc

    def echo(self) -> str:
        return "".join(f"{k}={'' if v is None else v}\n" for k, v in dataclasses.asdict(self).items())


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = str(_FIELDS[name].type)
    raw = raw.strip()
    if "Optional" in kind and raw in ("", "none", "None"):
        return None
    try:
        if "Fraction" in kind:
            return Fraction(raw)
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"config: bad value for {name}: {raw!r}") from exc
    return raw


def parse_pairs(lines, into: dict | None = None) -> dict:
    values = {} if into is None else into
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError(f"config: line {lineno}: expected key=value, got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(f"config: unknown key {key!r}")
        values[key] = _coerce(key, val)
    return values


def load_config(path: str | Path | None = None, overrides: list[str] = ()) -> RunConfig:
    values: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        parse_pairs(text.splitlines(), values)
    parse_pairs(overrides, values)
    return RunConfig(**values)
