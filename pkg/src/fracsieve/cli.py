"""Command-line entry point: ``fracsieve <command> [--config F] [--set k=v] ...``."""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path

from .config import RunConfig, load_config
from .errors import CapacityError, ConfigError, EmptySurvivors, SieveError
from .params import (Ladder, build_ladder, c_enclosure, check_ladder, delta, dyadic_level, h,
                     series_report)
from .report import emit_report, write_json, write_text
from .sequence import validate_growth
from .sieve import auto_window, sieve_range
from .validate import (budget_check, certified_step_check, eggleston_estimate, ladder_step_samples, lemma1_check,
                       lemma2_check, lemma3_check, sample_lemma1)
from .witness import DyadicRational, certify, extract_witness, recertify, write_certificate

COMMANDS = ("sieve", "witness", "certify", "validate", "dimension", "params")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMPTY = 3
EXIT_CAPACITY = 4
EXIT_VERDICT = 5
EXIT_OTHER = 6

AUTO_WINDOW_ATTEMPTS = 8


class Run:
    """Mutable state of one CLI invocation: config, output dir, phase timings."""

    def __init__(self, config: RunConfig, out: Path, threads: int = 1,
                 certificate: Path | None = None, log=print):
        self.config = config
        self.out = Path(out)
        self.threads = threads
        self.certificate = certificate
        self.phases: dict[str, float] = {}
        self.log = log
        self.seq = config.build_sequence()
        self.params = config.build_params(self.seq)

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0


# --- phases -----------------------------------------------------------------------

def _sieve(run: Run):
    cfg = run.config
    explicit = cfg.explicit_window()
    attempts = 1 if explicit is not None else AUTO_WINDOW_ATTEMPTS
    for attempt in range(attempts):
        window = explicit or auto_window(run.seq, run.params, cfg.start, cfg.window_level, attempt)
        try:
            with run.phase("sieve"):
                state = sieve_range(run.seq, run.params, window, cfg.start, cfg.n_to, cfg.max_runs)
            break
        except EmptySurvivors:
            if attempt == attempts - 1:
                raise
            run.log(f"window {window.level}:{window.index} emptied; trying the next auto window")
    write_text(run.out / "sieve_stats.csv", state.stats_csv())
    write_json(run.out / "survivors.json", state.snapshot())
    run.log(f"sieve: window {window.level}:{window.index}, n {cfg.start}..{cfg.n_to}, "
            f"level {state.level}, {len(state.survivors)} runs, "
            f"survivor fraction {float(state.survivors.measure() / window.measure):.6f}")
    return state


def cmd_sieve(run: Run) -> int:
    _sieve(run)
    return EXIT_OK


def _finish_certificate(run: Run, cert) -> int:
    write_certificate(cert, run.out)
    run.log(f"certify: alpha={cert.alpha.numerator}/2^{cert.alpha.level} "
            f"~ {float(cert.alpha.value):.15f}, min score {float(cert.min_score):.6f} "
            f"at n={cert.argmin_n}, 1/c ~ {float(cert.target.mid):.6f}, verdict={cert.verdict}")
    return EXIT_OK if cert.verdict else EXIT_VERDICT


def cmd_witness(run: Run) -> int:
    cfg = run.config
    state = _sieve(run)
    with run.phase("extract"):
        alpha, chain = extract_witness(state, cfg.strategy, cfg.seed)
    with run.phase("certify"):
        cert = certify(alpha, run.seq, run.params, cfg.start, cfg.n_to, run.threads, chain)
    return _finish_certificate(run, cert)


def _parse_alpha(text: str) -> DyadicRational:
    try:
        num, level = (int(x) for x in text.split(":"))
        return DyadicRational(num, level)
    except ValueError as exc:
        raise ConfigError(f"config: alpha must be 'numerator:level', got {text!r}") from exc


def cmd_certify(run: Run) -> int:
    cfg = run.config
    with run.phase("certify"):
        if run.certificate is not None:
            cert = recertify(run.certificate, run.threads, cfg.n_min)
        elif cfg.alpha is not None:
            cert = certify(_parse_alpha(cfg.alpha), run.seq, run.params, cfg.start, cfg.n_to,
                           run.threads)
        else:
            raise ConfigError("cli: certify needs --certificate PATH or alpha=numerator:level")
    return _finish_certificate(run, cert)


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _ladder_block(run: Run, mode: str, depth: int) -> dict:
    params = run.params if mode == run.params.h_mode else replace(run.params, h_mode=mode)
    try:
        ladder = build_ladder(params, run.seq, run.config.n_start, depth)
    except CapacityError as exc:
        return {"mode": mode, "error": str(exc)}
    block = {"mode": mode, "entries": list(ladder.entries),
             "levels": [dyadic_level(params, run.seq, n) for n in ladder.entries],
             "checks": check_ladder(params, run.seq, ladder).to_dict()}
    if len(ladder) >= 3:
        block["series"] = series_report(params, run.seq, ladder).to_dict()
    return block


def cmd_params(run: Run) -> int:
    cfg, params, seq = run.config, run.params, run.seq
    with run.phase("params"):
        c = c_enclosure(params)
        ns = sorted({n for n in (cfg.n_start, 100, 1000, 10_000, cfg.n_to) if n >= max(2, seq.n_min)})
        table = [{"n": n, "delta_lo": float(delta(params, n).lo), "delta_hi": float(delta(params, n).hi),
                  "l_n": dyadic_level(params, seq, n), "h_n": h(params, seq, n)} for n in ns]
        growth = validate_growth(seq, max(2, seq.n_min, cfg.n_start), max(cfg.n_to, cfg.n_start + 1))
        report = {
            "sequence": seq.spec, "gamma": str(params.gamma), "c_mode": params.c_mode,
            "c": {"lo": str(c.lo), "hi": str(c.hi), "decimal": float(c.mid)},
            "one_over_c": float(c.reciprocal().mid),
            "growth": asdict(growth),
            "delta_table": table,
            "ladder": _ladder_block(run, params.h_mode, cfg.ladder_depth),
            # the other h mode, for comparison only
            "ladder_alt": _ladder_block(run, "paper" if params.h_mode == "effective" else "effective",
                                        min(cfg.ladder_depth, 2)),
        }
    write_json(run.out / "params_report.json", report)
    write_text(run.out / "delta_table.csv", _rows_csv(table))
    run.log(f"params: c ~ {float(c.mid):.6f}, 1/c ~ {report['one_over_c']:.6f}, "
            f"ladder ({params.h_mode}) = {report['ladder'].get('entries', report['ladder'].get('error'))}")
    return EXIT_OK


def cmd_validate(run: Run) -> int:
    cfg, params, seq = run.config, run.params, run.seq
    report: dict = {}
    status = EXIT_OK
    with run.phase("lemma1"):
        samples = sample_lemma1(seq, params, cfg.l1_n_lo, cfg.l1_n_hi, cfg.l1_samples, cfg.seed)
        l1 = lemma1_check(seq, params, samples)
    report["L1"] = l1.to_dict()
    write_text(run.out / "lemma1_samples.csv", _rows_csv(l1.details))

    ladder = build_ladder(params, seq, cfg.n_start, 2)
    step = (ladder[0], ladder[1], ladder[2] if cfg.l23_M_cap is None else min(ladder[2], cfg.l23_M_cap))
    if step[2] <= step[1]:
        raise ConfigError(f"config: l23_M_cap={cfg.l23_M_cap} must exceed m={step[1]}")
    report["step"] = {"n": step[0], "m": step[1], "M": step[2], "truncated": step[2] != ladder[2]}
    window = cfg.explicit_window() or auto_window(seq, params, cfg.n_start, cfg.window_level)
    try:
        with run.phase("lemma23"):
            cell_samples = ladder_step_samples(seq, params, step, window, cfg.l23_samples, cfg.seed,
                                               cfg.work_budget)
        l2 = lemma2_check(seq, params, step, window, cell_samples)
        l3 = lemma3_check(seq, params, step, window, cell_samples)
        report["L2"], report["L3"] = l2.to_dict(), l3.to_dict()
        write_text(run.out / "lemma2_samples.csv", _rows_csv(l2.details))
        write_text(run.out / "lemma3_samples.csv", _rows_csv(l3.details))
    except CapacityError as exc:
        report["L2"] = report["L3"] = {"status": "capacity", "error": str(exc)}
        status = EXIT_CAPACITY
    if ladder[2] != step[2] or "error" in report["L2"]:
        # exact counting over the full step is out of reach; bound the loss instead
        with run.phase("certified_bounds"):
            full = (ladder[0], ladder[1], ladder[2])
            b2, b3 = certified_step_check(seq, params, full, window, cfg.l23_samples, cfg.seed,
                                          cfg.work_budget)
        report["L2_bound"], report["L3_bound"] = b2.to_dict(), b3.to_dict()
        write_text(run.out / "lemma2_bound_samples.csv", _rows_csv(b2.details))
        write_text(run.out / "lemma3_bound_samples.csv", _rows_csv(b3.details))
    with run.phase("budget"):
        report["budget"] = budget_check(params, ladder[1], ladder[2]).to_dict()
    report["ladder"] = _ladder_block(run, params.h_mode, cfg.ladder_depth)
    # the h_mode=paper ladder is informational: its checks are reported, never fatal
    report["ladder_h_paper_informational"] = _ladder_block(run, "paper", min(cfg.ladder_depth, 2))
    write_json(run.out / "validation_report.json", report)
    if status == EXIT_OK and any(report[k].get("pass") is False for k in ("L1", "L2", "L3", "budget")):
        status = EXIT_VERDICT
    for key in ("L1", "L2", "L3", "L2_bound", "L3_bound", "budget"):
        entry = report.get(key)
        if entry is None:
            continue
        run.log(f"validate {key}: {entry.get('status')} worst={entry.get('worst_ratio')} "
                f"bound={entry.get('bound')}")
    return status


def cmd_dimension(run: Run) -> int:
    cfg = run.config
    with run.phase("dimension"):
        ladder: Ladder = build_ladder(run.params, run.seq, cfg.n_start, cfg.ladder_depth)
        est = eggleston_estimate(run.seq, run.params, ladder)
    write_json(run.out / "dimension.json", est.to_dict())
    write_text(run.out / "dimension.csv", est.csv())
    run.log(f"dimension: ladder {list(ladder.entries)}, D = {[round(d, 6) for d in est.D]}, "
            f"valid={est.valid}")
    return EXIT_OK


HANDLERS = {"sieve": cmd_sieve, "witness": cmd_witness, "certify": cmd_certify,
            "validate": cmd_validate, "dimension": cmd_dimension, "params": cmd_params}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsieve", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--out", type=Path, default=Path("run"), help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker cap; never changes outputs")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="config override, repeatable")
    parser.add_argument("--certificate", type=Path, help="certificate JSON to re-verify (certify)")
    parser.add_argument("--quiet", action="store_true")
    return parser


def run(config: RunConfig, command: str, out: Path, threads: int = 1,
        certificate: Path | None = None, quiet: bool = False) -> int:
    log = (lambda *_: None) if quiet else print
    if threads < 1:
        print("error: cli: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    status_word = "ok"
    r = None
    try:
        r = Run(config, out, threads, certificate, log)
        code = HANDLERS[command](r)
        status_word = {EXIT_OK: "ok", EXIT_VERDICT: "verdict-false", EXIT_CAPACITY: "capacity"}[code]
    except ConfigError as exc:
        code, status_word = EXIT_CONFIG, "config-error"
        print(f"error: {exc}", file=sys.stderr)
    except EmptySurvivors as exc:
        code, status_word = EXIT_EMPTY, "empty-survivors"
        print(f"error: {exc}", file=sys.stderr)
    except CapacityError as exc:
        code, status_word = EXIT_CAPACITY, "capacity"
        print(f"error: {exc}", file=sys.stderr)
    except (SieveError, OSError) as exc:
        code, status_word = EXIT_OTHER, "error"
        print(f"error: {exc}", file=sys.stderr)
    emit_report(out, command, config.echo(), r.phases if r else {}, status_word)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config, args.command, args.out, args.threads, args.certificate, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
