import math
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, strategies as st

from singlex.combinat import (
    DesignParams,
    binomial,
    ceil_q,
    decaen_lower,
    ext,
    floor_q,
    phi,
    pow_ratio,
    schoenheim_lower,
    simple_lower,
)


@given(st.integers(0, 700), st.integers(-3, 703))
def test_binomial_matches_math_comb(n, k):
    expect = math.comb(n, k) if 0 <= k <= n else 0
    assert binomial(n, k) == expect


def test_binomial_rejects_negative_n():
    with pytest.raises(ValueError):
        binomial(-1, 0)


def test_phi_counts_covering_blocks():
    # t-subsets of {1..5} covering {1,2} with t=2: drop 1 or drop 2, plus one outsider
    assert phi(5, 2, 2) == 2 * 3
    assert phi(5, 2, 1) == binomial(4, 2)


@given(st.fractions(min_value=-50, max_value=50))
def test_floor_and_ceil_of_rationals(x):
    assert floor_q(x) == math.floor(x)
    assert ceil_q(x) == math.ceil(x)


def test_lower_bounds_at_small_cases():
    # T(5,3,2) = 10 - 6 (Mantel) = 4, and Schoenheim is tight there
    assert schoenheim_lower(5, 2) == 4
    assert simple_lower(5, 2) == 4
    assert schoenheim_lower(31, 5) == 33981
    assert decaen_lower(4, 2) == 2


@given(st.integers(3, 60).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))))
def test_schoenheim_dominates_simple(nt):
    n, t = nt
    assert schoenheim_lower(n, t) >= simple_lower(n, t)


def test_design_params_from_code():
    p = DesignParams.from_code(31, 7)
    assert (p.t, p.k, p.d, p.dual_distance) == (5, 25, 7, 26)
    with pytest.raises(ValueError):
        DesignParams.from_code(5, 6)


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 300))
def test_pow_ratio_brackets_the_exact_power(a, b, e):
    num, den = min(a, b), max(a, b)
    exact = Fraction(num, den) ** e
    lo = pow_ratio(num, den, e, "down")
    hi = pow_ratio(num, den, e, "up")
    assert gmpy2.mpq(lo) <= gmpy2.mpq(exact.numerator, exact.denominator) <= gmpy2.mpq(hi)


def test_ext_rounds_in_the_requested_direction():
    third = Fraction(1, 3)
    assert ext(third, "down") < ext(third, "up")
    assert ext(7, "down") == ext(7, "up") == 7
