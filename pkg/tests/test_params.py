from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fracsieve.errors import CapacityError, DomainError
from fracsieve.params import (SieveParams, build_ladder, c_enclosure, c_of_gamma, check_ladder,
                              delta, dyadic_level, h_effective, h_paper, inv_delta, level_bracket,
                              omega, series_report)
from fracsieve.sequence import make_polynomial


def test_c_values():
    assert c_of_gamma(2) == pytest.approx(oracles.C_GAMMA2, abs=1e-4)
    assert c_of_gamma(1) == pytest.approx(oracles.C_GAMMA1, abs=1e-4)
    assert c_of_gamma(2) < c_of_gamma(1)


@given(st.fractions(min_value=Fraction(1, 20), max_value=Fraction(50)))
@settings(max_examples=40, deadline=None)
def test_c_enclosure_contains_reference(gamma):
    enc = c_enclosure(SieveParams(gamma=gamma))
    ref = oracles.c_ref(mpmath.mpf(gamma.numerator) / gamma.denominator)
    assert enc.lo <= Fraction(str(ref)) * (1 + Fraction(1, 10**30))
    assert enc.hi >= Fraction(str(ref)) * (1 - Fraction(1, 10**30))
    assert enc.width < Fraction(1, 2**100)


def test_custom_c():
    p = SieveParams(gamma=2, c_mode="custom", c_value=Fraction(2, 5))
    assert c_enclosure(p).is_point and c_enclosure(p).lo == Fraction(2, 5)


@pytest.mark.parametrize("kwargs", [
    {"gamma": 0}, {"gamma": 2, "c_mode": "other"}, {"gamma": 2, "c_mode": "custom"},
    {"gamma": 2, "h_mode": "lazy"}, {"gamma": 2, "v": 1}, {"gamma": 2, "n_start": 1},
])
def test_param_validation(kwargs):
    with pytest.raises(DomainError):
        SieveParams(**kwargs)


def test_delta_values(params2):
    assert float(delta(params2, 100).mid) == pytest.approx(oracles.DELTA_100, rel=1e-3)
    assert float(delta(params2, 10**4).mid) == pytest.approx(oracles.DELTA_10K, rel=1e-3)


def test_delta_domain(params2):
    with pytest.raises(DomainError):
        delta(params2, 1)


def test_delta_decreasing(params2):
    prev = delta(params2, 3)
    for n in range(4, 3000):
        cur = delta(params2, n)
        assert cur.hi < prev.lo
        prev = cur


@given(st.integers(2, 10**9))
@settings(max_examples=50, deadline=None)
def test_delta_is_reciprocal_of_inv_delta(n):
    p = SieveParams(gamma=2)
    inv = inv_delta(p, n)
    d = delta(p, n)
    assert d.lo * inv.hi == 1 and d.hi * inv.lo == 1
    ref = Fraction(str(oracles.delta_ref(2, n)))
    assert d.lo * (1 - Fraction(1, 10**25)) <= ref <= d.hi * (1 + Fraction(1, 10**25))


def test_h_paper_examples():
    assert h_paper(SieveParams(gamma=2), 100) == oracles.H_PAPER_100
    assert h_paper(SieveParams(gamma=1), 2) == 3
    assert h_paper(SieveParams(gamma=2), 4606) == oracles.h_paper_ref(2, 4606)


@given(st.integers(2, 10**6))
@settings(max_examples=60, deadline=None)
def test_h_paper_matches_reference(n):
    assert h_paper(SieveParams(gamma=2), n) == oracles.h_paper_ref(2, n)


def test_h_effective_examples(square, params2):
    assert h_effective(params2, square, 2) == oracles.H_EFFECTIVE_2
    assert h_effective(params2, square, 32) == oracles.h_effective_ref(32)


@given(st.integers(2, 10**5))
@settings(max_examples=60, deadline=None)
def test_h_effective_matches_scan(n):
    seq, p = make_polynomial([1, 0, 0]), SieveParams(gamma=2)
    m = h_effective(p, seq, n)
    assert m > n
    assert m == oracles.h_effective_ref(n)


def test_h_effective_cap(square):
    with pytest.raises(CapacityError):
        h_effective(SieveParams(gamma=2, index_cap=1000), square, 32)


def test_level_examples(square, params2):
    assert dyadic_level(params2, square, 100) == oracles.LEVEL_100
    assert dyadic_level(params2, square, 10**4) == oracles.LEVEL_10K


def test_level_monotone_and_bracketed(square, params2):
    prev = 0
    for n in range(2, 2000):
        level, enc = level_bracket(params2, square, n)
        assert Fraction(2) ** level <= enc.lo and enc.hi < Fraction(2) ** (level + 1)
        assert level >= prev
        prev = level


@given(st.integers(2, 10**8))
@settings(max_examples=60, deadline=None)
def test_level_matches_reference(n):
    assert dyadic_level(SieveParams(gamma=2), make_polynomial([1, 0, 0]), n) == oracles.level_ref(2, n * n, n)


def test_ladders(square, params2, params2_paper):
    assert build_ladder(params2_paper, square, 100, 2).entries == (100, 4606, h_paper(params2_paper, 4606))
    assert build_ladder(params2, square, 2, 1).entries == (2, 18)
    assert build_ladder(params2, square, 77, 0).entries == (77,)


def test_ladder_strictly_increasing(square, params2):
    entries = build_ladder(params2, square, 32, 3).entries
    assert all(b >= a + 1 for a, b in zip(entries, entries[1:]))
    assert entries == (32, 2499, 2590874, 118827042138)


def test_ladder_index_cap(square):
    with pytest.raises(CapacityError) as err:
        build_ladder(SieveParams(gamma=2, index_cap=10**6), square, 32, 3)
    assert "k=2" in str(err.value)


@pytest.mark.parametrize("n0", [2, 32, 100, 1000])
def test_effective_ladder_passes_depth_gap(square, params2, n0):
    assert check_ladder(params2, square, build_ladder(params2, square, n0, 2)).depth_gap_pass


def test_paper_ladder_flags_depth_gap(square, params2_paper):
    rep = check_ladder(params2_paper, square, build_ladder(params2_paper, square, 100, 1))
    rec = rep.records[0]
    assert not rep.depth_gap_pass
    assert rec["t_ratio"] == pytest.approx(2121.5, abs=0.1)
    assert rec["inv_delta_prev"] == pytest.approx(25317, rel=1e-3)


def test_single_entry_ladder_vacuous(square, params2):
    rep = check_ladder(params2, square, build_ladder(params2, square, 32, 0))
    assert rep.records == [] and rep.depth_gap_pass and rep.growth_band_pass


def test_omega_examples():
    assert omega(Fraction(2), Fraction(3, 5), Fraction(1, 100)) == Fraction(-282, 1000)
    assert omega(Fraction(2), Fraction(2, 3), Fraction(1, 100)) == Fraction(2, 100)
    assert omega(Fraction(1), Fraction(1, 2), Fraction(0)) == 0


@given(gamma=st.fractions(min_value=Fraction(1, 4), max_value=Fraction(20)),
       v=st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)),
       eps2=st.fractions(min_value=0, max_value=Fraction(1)))
def test_omega_matches_reference(gamma, v, eps2):
    assert omega(gamma, v, eps2) == oracles.omega_ref(gamma, v, eps2)


def test_series_report(square, params2):
    ladder = build_ladder(params2, square, 32, 3)
    rep = series_report(params2, square, ladder)
    assert rep.omega < 0 and not rep.boundary
    assert rep.verdict == "convergent-trend"
    assert len(rep.terms) == 2
    edge = series_report(params2, square, ladder, v=Fraction(2, 3))
    assert edge.boundary and edge.verdict == "inconclusive"


def test_series_needs_three_entries(square, params2):
    with pytest.raises(DomainError):
        series_report(params2, square, build_ladder(params2, square, 32, 1))
