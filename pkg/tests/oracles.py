"""Independent reference values computed with plain mpmath at high precision.

Nothing here imports the package; tests compare the package against these.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath

mpmath.mp.dps = 60


def c_ref(gamma) -> mpmath.mpf:
    return 60 * mpmath.log(2 + 1 / mpmath.mpf(gamma))


def delta_ref(gamma, n: int) -> mpmath.mpf:
    return 1 / (c_ref(gamma) * n * mpmath.log(n))


def level_ref(gamma, t: int, n: int) -> int:
    return int(mpmath.floor(mpmath.log(2 * t / delta_ref(gamma, n), 2)))


def h_paper_ref(gamma, n: int) -> int:
    g = mpmath.mpf(gamma)
    m = int(mpmath.ceil(mpmath.power(n, 1 + 1 / g) * mpmath.power(mpmath.log(n), 2 / g)))
    return max(m, n + 1)


def h_effective_ref(n: int, t=lambda k: k * k, gamma=2) -> int:
    """Linear scan from the analytic estimate downwards, then upwards."""
    need = t(n) / delta_ref(gamma, n)
    m = max(n + 1, int(mpmath.sqrt(need)) - 3) if gamma == 2 else n + 1
    while m > n + 1 and t(m - 1) >= need:
        m -= 1
    while t(m) < need:
        m += 1
    return m


def omega_ref(gamma: Fraction, v: Fraction, eps2: Fraction) -> Fraction:
    return ((1 + 1 / gamma + eps2) * v - 1) * (gamma + 1)


# values pinned from the op examples, re-derived above
C_GAMMA2 = 54.9774
C_GAMMA1 = 65.9167
DELTA_100 = 3.950e-5
DELTA_10K = 1.975e-7
H_PAPER_100 = 4606
H_EFFECTIVE_2 = 18
LEVEL_100 = 28
LEVEL_10K = 49
TOY_MARKED = [0, 7, 8, 15, 16, 23, 24, 31]
