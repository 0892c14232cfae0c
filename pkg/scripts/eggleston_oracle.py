"""Formula oracle for the dimension count on t_n = n^2.

Recomputes the effective ladder, the dyadic levels, the guaranteed child
counts N_k = floor(2^(l_{k+1} - l_k) / 3), the running products R_k and the
ratios D_k = log2 R_k / l_{n_k} with plain mpmath at 60 digits.  Shares no
code with the package, so the acceptance suite can compare against it.

    python3 scripts/eggleston_oracle.py --n0 32 --depth 3
"""
from __future__ import annotations

import argparse
import sys

import mpmath

mpmath.mp.dps = 60


def inv_delta(n, gamma=2):
    return 60 * mpmath.log(2 + mpmath.mpf(1) / gamma) * n * mpmath.log(n)


def next_index(n):
    # smallest m with m^2 >= n^2 / delta_n
    target = mpmath.mpf(n) ** 2 * inv_delta(n)
    m = int(mpmath.floor(mpmath.sqrt(target))) - 2
    while mpmath.mpf(m) ** 2 >= target:
        m -= 1
    while mpmath.mpf(m) ** 2 < target:
        m += 1
    return m


def level(n):
    return int(mpmath.floor(mpmath.log(2 * mpmath.mpf(n) ** 2 * inv_delta(n), 2)))


def evaluate(n0: int = 32, depth: int = 3) -> dict:
    ladder = [n0]
    for _ in range(depth):
        ladder.append(next_index(ladder[-1]))
    levels = [level(n) for n in ladder]
    counts = [int(mpmath.floor(mpmath.mpf(2) ** (b - a) / 3)) for a, b in zip(levels, levels[1:])]
    R, D = [], []
    acc = mpmath.mpf(1)
    for k, count in enumerate(counts, start=1):
        acc *= count
        R.append(acc)
        D.append(mpmath.log(acc, 2) / levels[k])
    return {"ladder": ladder, "levels": levels, "counts": counts, "R": R, "D": D}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n0", type=int, default=32)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args(argv)
    res = evaluate(args.n0, args.depth)
    print("k,n_k,l_nk,N_k,R_k,D_k")
    print(f"0,{res['ladder'][0]},{res['levels'][0]},,,")
    for k in range(1, len(res["ladder"])):
        print(f"{k},{res['ladder'][k]},{res['levels'][k]},{res['counts'][k - 1]},"
              f"{mpmath.nstr(res['R'][k - 1], 20)},{mpmath.nstr(res['D'][k - 1], 15)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
