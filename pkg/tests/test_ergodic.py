import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from collatz_ergodic.dynamics import Limits
from collatz_ergodic.ergodic import (FiniteSupportFunction, UnresolvedOrbit, amb_case, amb_case_limit,
                                     amb_empirical_check, cesaro_average, decompose, f_star, grid_rows)
from collatz_ergodic.mapmodel import COLLATZ_T, THREE_N_MINUS_ONE
from collatz_ergodic.measures import UnresolvedPoint

import oracle

F = Fraction
ONE = FiniteSupportFunction.indicator([1])


def test_cesaro_on_cycle():
    assert cesaro_average(COLLATZ_T, ONE, 1, 2) == F(1, 2)
    assert cesaro_average(COLLATZ_T, ONE, 1, 1) == 0
    assert cesaro_average(COLLATZ_T, ONE, 2, 1) == 1


def test_cesaro_converges_for_3():
    v = cesaro_average(COLLATZ_T, ONE, 3, 10**4)
    assert abs(v - F(1, 2)) <= F(1, 1000)
    assert v == cesaro_average(COLLATZ_T, ONE, 3, 10**4, method="direct")


def test_zero_function():
    zero = FiniteSupportFunction({})
    for x in (1, 3, 27):
        for N in (1, 10, 10**6):
            assert cesaro_average(COLLATZ_T, zero, x, N) == 0


def test_huge_N_uses_closed_form():
    v = cesaro_average(COLLATZ_T, ONE, 27, 10**12)
    assert abs(v - F(1, 2)) < F(1, 10**10)
    with pytest.raises(UnresolvedOrbit):
        cesaro_average(COLLATZ_T, ONE, 27, 10**6, Limits(10**5, 2**64), method="direct")


def test_decompose():
    d = decompose(COLLATZ_T, 7)
    assert d.prefix == (7, 11, 17, 26, 13, 20, 10, 5, 8, 4)
    assert d.cycle == (2, 1) and d.preperiod == 10 and d.period == 2
    assert d.error_constant() == 14


def test_function_values():
    f = FiniteSupportFunction({3: F(1, 2), 5: 0, 7: 2})
    assert f.support == {3, 7} and f(3) == F(1, 2) and f(4) == 0
    assert hash(f) == hash(FiniteSupportFunction({7: 2, 3: F(1, 2)}))


@settings(max_examples=150, deadline=None)
@given(st.dictionaries(st.integers(1, 60), st.fractions(-3, 3, max_denominator=7), max_size=5),
       st.integers(1, 3000), st.integers(1, 400))
def test_closed_form_matches_iteration(vals, x, N):
    f = FiniteSupportFunction(vals)
    closed = cesaro_average(COLLATZ_T, f, x, N)
    assert closed == cesaro_average(COLLATZ_T, f, x, N, method="direct")
    assert closed == oracle.cesaro_direct(oracle.t_map, f.values, x, N)


@settings(max_examples=80, deadline=None)
@given(st.sets(st.integers(1, 200), min_size=1, max_size=4), st.integers(1, 2000), st.integers(1, 300))
def test_closed_form_multi_cycle(A, x, N):
    f = FiniteSupportFunction.indicator(A)
    assert cesaro_average(THREE_N_MINUS_ONE, f, x, N) == oracle.cesaro_direct(oracle.m_map, f.values, x, N)


def test_f_star(t_report, m_report):
    assert f_star(t_report, {1}, 27) == F(1, 2)
    assert all(f_star(t_report, {3}, x) == 0 for x in range(1, 200))
    assert f_star(m_report, {5, 7}, 14) == F(2, 3)
    assert f_star(t_report, {1, 2}, 10**7 + 1) == 1


def test_f_star_unresolved():
    from collatz_ergodic.hopf import classify_window
    r = classify_window(COLLATZ_T, 100, Limits(20, 2**64))
    with pytest.raises(UnresolvedPoint):
        f_star(r, {1}, 27)


def test_f_star_is_the_limit(t_report, m_report):
    for rep, bmap in ((t_report, COLLATZ_T), (m_report, THREE_N_MINUS_ONE)):
        for A in ({1}, {5, 7}, {17, 55, 2}):
            f = FiniteSupportFunction.indicator(A)
            for x in (3, 14, 27, 97):
                dec = decompose(bmap, x)
                N = 10**5
                err = abs(cesaro_average(bmap, f, x, N) - f_star(rep, A, x))
                assert err <= F(dec.error_constant(), N)


@pytest.mark.parametrize("y,a,lim,case", [
    (7, 1, F(1, 2), "D1xC:same"), (7, 20, 0, "DxD"), (1, 2, F(1, 2), "CxC:same"), (2, 7, 0, "CxD"),
])
def test_amb_case_limit_t(t_report, y, a, lim, case):
    assert amb_case_limit(t_report, y, a) == lim
    assert amb_case(t_report, y, a) == case


def test_amb_case_limit_other_cycle(m_report):
    assert amb_case_limit(m_report, 1, 5) == 0 and amb_case(m_report, 1, 5) == "CxC:other"
    assert amb_case_limit(m_report, 14, 7) == F(1, 3) and amb_case(m_report, 14, 7) == "D1xC:same"
    assert amb_case_limit(m_report, 3, 5) == 0 and amb_case(m_report, 3, 5) == "D1xC:other"
    assert amb_case_limit(m_report, 272, 68) == F(1, 11)


def test_amb_empirical(t_report):
    r = amb_empirical_check(t_report, {7}, {1}, 10**4)
    assert r.exact_limit == F(1, 2) and r.bound_ok
    assert abs(r.empirical - F(1, 2)) <= F(14, 10**4)
    r = amb_empirical_check(t_report, {3, 7, 27}, {1, 2}, 10**4)
    assert r.exact_limit == 3 and r.per_point_limits == (1, 1, 1) and r.bound_ok
    for Y, A in ((set(), {1}), ({3}, set())):
        r = amb_empirical_check(t_report, Y, A, 100)
        assert (r.empirical, r.exact_limit, r.bound_ok) == (0, 0, True)


def test_grid_rows(t_report):
    rows = list(grid_rows(t_report, [3, 7, 27], [1, 2], [100, 1000, 10000]))
    assert len(rows) == 18 and all(r[-1] for r in rows)
    assert all(r[4] == 0 for r in grid_rows(t_report, [3, 7, 27], [3], [100]))


def test_seeded_triples_equal_direct():
    rng = random.Random(1)
    for _ in range(50):
        f = FiniteSupportFunction({rng.randint(1, 40): F(rng.randint(-5, 5), rng.randint(1, 6))
                                   for _ in range(rng.randint(0, 4))})
        x, N = rng.randint(1, 10**4), rng.randint(1, 1000)
        assert cesaro_average(COLLATZ_T, f, x, N) == cesaro_average(COLLATZ_T, f, x, N, method="direct")
