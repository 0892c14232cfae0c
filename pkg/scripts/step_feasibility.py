"""Cost of following stage-n survivor cells through one ladder step, and a truncated run.

The first effective step from n_0 = 32 ends at M = 2,590,874; sieving one
stage-32 cell (width 2^-23) that far visits ~7e11 grid points.  This script
prints the estimate and then runs the retention and good-children checks on
the truncated step (32, 2499, M_cap).

    python3 scripts/step_feasibility.py --m-cap 20000 --samples 2
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from fracsieve.params import SieveParams, build_ladder, dyadic_level
from fracsieve.sequence import make_polynomial
from fracsieve.sieve import auto_window
from fracsieve.validate import (budget_check, ladder_step_samples, lemma2_check, lemma3_check,
                                step_work)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m-cap", type=int, default=20_000)
    ap.add_argument("--samples", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    seq = make_polynomial([1, 0, 0])
    params = SieveParams(gamma=Fraction(2))
    n, m, M = build_ladder(params, seq, 32, 2).entries
    width = 2.0 ** -dyadic_level(params, seq, n)
    for top in (M, args.m_cap):
        print(f"step ({n}, {m}, {top}): ~{step_work(seq, n + 1, top, width):.3g} grid-point evaluations per J")
    print(f"budget over ({m}, {M}]: {budget_check(params, m, M).details[0]}")
    step = (n, m, args.m_cap)
    window = auto_window(seq, params, n)
    t0 = time.perf_counter()
    samples = ladder_step_samples(seq, params, step, window, args.samples, args.seed, work_budget=1e12)
    print(f"followed {len(samples)} cells in {time.perf_counter() - t0:.1f}s")
    for rep in (lemma2_check(seq, params, step, window, samples),
                lemma3_check(seq, params, step, window, samples)):
        print(rep.to_dict())
        for d in rep.details:
            print("   ", d)
    return 0


if __name__ == "__main__":
    sys.exit(main())
