"""Distribution of the cover ratio mu(J & A_m) / (delta_m mu(J)) for t_n = n^2.

Compares m = h(n) under the effective and the asymptotic h rule.  Stage-m
cells have width w in [delta/(2t), delta/t), so each closed segment of length
2 delta/t touches 3 to 5 cells.  When J holds many stage-m grid points the
ratio tends to 2 + t w / delta < 3; when J holds about one point or fewer
(effective rule: ~0.7 on average; asymptotic rule at these small n: far fewer)
a single hit already costs 3-5 cells against a tiny delta_m mu(J), and the
ratio can exceed 5.

    python3 scripts/cover_ratio_survey.py --samples 400 --seed 0
"""
from __future__ import annotations

import argparse
import statistics
import sys
from fractions import Fraction

from fracsieve.params import SieveParams, dyadic_level
from fracsieve.sequence import make_polynomial
from fracsieve.validate import lemma1_check, sample_lemma1


def survey(h_mode: str, n_lo: int, n_hi: int, samples: int, seed: int) -> dict:
    seq = make_polynomial([1, 0, 0])
    params = SieveParams(gamma=Fraction(2), h_mode=h_mode)
    rep = lemma1_check(seq, params, sample_lemma1(seq, params, n_lo, n_hi, samples, seed))
    ratios = [d["ratio"] for d in rep.details]
    over = [d for d in rep.details if d["ratio"] > 5]
    return {
        "h_mode": h_mode, "samples": len(ratios), "worst": max(ratios),
        "mean": statistics.fmean(ratios), "over_5": len(over),
        "grid_points_per_J": statistics.fmean(d["grid_points_per_J"] for d in rep.details),
        "worst_sample": max(rep.details, key=lambda d: d["ratio"]),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-lo", type=int, default=32)
    ap.add_argument("--n-hi", type=int, default=200)
    args = ap.parse_args(argv)
    for mode in ("effective", "paper"):
        s = survey(mode, args.n_lo, args.n_hi, args.samples, args.seed)
        w = s["worst_sample"]
        print(f"{mode:>9}: worst {s['worst']:.4f}  mean {s['mean']:.4f}  "
              f"over 5: {s['over_5']}/{s['samples']}  grid points per J {s['grid_points_per_J']:.2f}")
        print(f"{'':>11}worst at n={w['n']} m={w['m']} J={w['J']} (l_n={w['l_n']}, l_m={w['l_m']}, "
              f"cells hit {w['cells_hit']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
