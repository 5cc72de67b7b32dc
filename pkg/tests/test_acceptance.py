"""Acceptance criteria 1-8, one test each.

Every test records a ``criterion N: PASS|FAIL`` line; the lines are printed
again in the terminal summary.  Runtime limits are measured inside the
tests, so the suite fails if a limit is missed even when values are right.
"""
import csv
import io
import itertools
import time
from contextlib import contextmanager
from fractions import Fraction

import gmpy2
import numpy as np

from singlex import bounds as B
from singlex.cli import sweep_lines
from singlex.coding import (
    CodeSpec,
    ParityCheckMatrix,
    build_h_from_se,
    codeword_with_support,
    peel_decode,
    replace_nonmin_rows,
    replacement_cap,
    stopping_distance,
)
from singlex.combinat import ceil_div, schoenheim_lower
from singlex.constructions import (
    construct_bin_parity,
    construct_kuzjurin,
    construct_random_greedy,
    construct_recurrent_se,
    construct_weighted_partition,
)
from singlex.exact import min_se, min_turan
from singlex.setsys import SetSystem, is_covering_design, is_se_system

TABLE_CELLS = ((31, 7), (31, 23), (31, 27))

TABLE_INTEGER_ROWS = {
    "construction_a": (93691, 7693683, 86148),
    "construction_b": (76986, 12151903, 299697),
    "recurrent_a": (124250, 7161809, 88673),
    "recurrent_c": (599474, 7442607, 55905),
    "schwartz_vardy": (142506, 31475730, 617526),
    "lower_bound": (33981, 2103660, 29450),
}
TABLE_PROBABILISTIC = (96112, 6412596, 77298)
TABLE_RECURRENT_B = (71891, 9665343, 520847)
TABLE_WINNERS = ("recurrent_b", "probabilistic", "recurrent_c")

# pinned from the first evaluation of this implementation
ETA_DOMINANT_RATIO_100_10 = 1.0
ETA_LAST_TERM_100_10 = 0.0070848920854757426
RECURRENT_C_RATIOS_200 = {
    3: Fraction(150311, 109450),
    4: Fraction(1714151, 1293699),
    5: Fraction(557843007, 422608340),
}

PRIME_CEILING = 97
SWEEP_SECONDS = 600


@contextmanager
def criterion(log, number, title):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        line = (f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
                f"  ({time.perf_counter() - start:.1f}s)")
        print(line)
        log.append(line)


def integer_row(name, n, d):
    t, k = d - 2, n - d + 1
    if name == "construction_a":
        return B.kim_roush_min(n, t).value
    if name == "construction_b":
        return B.frankl_rodl_min(n, t).value
    if name == "recurrent_a":
        return B.recurrent_a(n, k).value
    if name == "recurrent_c":
        return B.recurrent_c(n, k).value
    if name == "schwartz_vardy":
        return B.schwartz_vardy(n, d)[1]
    return schoenheim_lower(n, t)


def test_criterion_1_table_integer_rows(acceptance_log):
    with criterion(acceptance_log, 1, "reference table integer-formula rows, exact"):
        start = time.perf_counter()
        got = {name: tuple(integer_row(name, n, d) for n, d in TABLE_CELLS)
               for name in TABLE_INTEGER_ROWS}
        elapsed = time.perf_counter() - start
        assert got == TABLE_INTEGER_ROWS
        assert elapsed < 10, f"{elapsed:.1f}s"


def test_criterion_2_table_optimized_rows(acceptance_log):
    with criterion(acceptance_log, 2, "reference table probabilistic within 0.05%, Recurrent B exact"):
        start = time.perf_counter()
        prob = [B.prob_bound_min(n, d - 2).value for n, d in TABLE_CELLS]
        rb = [B.recurrent_b_min(n, d - 2).value for n, d in TABLE_CELLS]
        elapsed = time.perf_counter() - start
        for value, ref in zip(prob, TABLE_PROBABILISTIC):
            assert abs(value - ref) <= 5e-4 * ref, (value, ref)
        assert tuple(rb) == TABLE_RECURRENT_B
        assert elapsed < 60, f"{elapsed:.1f}s"


def test_criterion_3_table_winners(acceptance_log):
    with criterion(acceptance_log, 3, "reference table winners"):
        winners = tuple(B.best_bounds(n, d).winner for n, d in TABLE_CELLS)
        assert winners == TABLE_WINNERS


def _timed(fn, *args):
    start = time.perf_counter()
    value = fn(*args)[0]
    return value, time.perf_counter() - start


def test_criterion_4_exact_small_values(acceptance_log):
    with criterion(acceptance_log, 4, "exact S and T values by branch and bound"):
        cases = [((4, 2), 3), ((5, 2), 5), ((5, 3), 4)]
        cases += [((n, n - 2), n - 1) for n in range(4, 11)]
        for args, expect in cases:
            value, secs = _timed(min_se, *args)
            assert value == expect, (args, value)
            assert secs < 300, (args, secs)
        for n in (6, 7, 8):
            s_val, s_secs = _timed(min_se, n, 3)
            t_val, t_secs = _timed(min_turan, n, 4, 3)
            assert s_val == t_val, (n, s_val, t_val)
            assert max(s_secs, t_secs) < 300


def _construction_failures():
    bad = []
    for n in range(3, 11):
        for t in range(1, n):
            for l in range(1, n + 1):
                sizes = []
                for j in range(l):
                    sys = construct_bin_parity(n, t, l, j)
                    if not is_se_system(sys):
                        bad.append(("bin_parity", n, t, l, j))
                    sizes.append(len(sys))
                if min(sizes) > B.frankl_rodl_bound(n, t, l):
                    bad.append(("bin_parity count", n, t, l))
            if t < n - 2:
                for l in range(ceil_div(n, n - t - 2), n + 1):
                    sizes = []
                    for j in range(l):
                        sys = construct_weighted_partition(n, t, l, j)
                        if not is_se_system(sys):
                            bad.append(("weighted", n, t, l, j))
                        sizes.append(len(sys))
                    if min(sizes) > B.kim_roush_bound(n, t, l):
                        bad.append(("weighted count", n, t, l))
            if t < n - 1:
                sys = construct_recurrent_se(n, t)
                if not is_se_system(sys) or len(sys) > B.recurrent_sum(n, t):
                    bad.append(("recurrent", n, t))
            for seed, p in itertools.product((0, 1), (0.0, 0.3, 0.7)):
                if not is_se_system(construct_random_greedy(n, t, p, seed)):
                    bad.append(("random", n, t, p, seed))
        for k in range(1, n + 1):
            sys = construct_kuzjurin(n, k)
            if not is_covering_design(sys, k - 1) or len(sys) > B.kuzjurin_bound(n, k):
                bad.append(("kuzjurin", n, k))
    return bad


def test_criterion_5_constructions_valid(acceptance_log):
    with criterion(acceptance_log, 5, "every construction verified for n <= 10, counts within formulas"):
        assert _construction_failures() == []


def _se_system(n, t):
    if t == 0:
        return SetSystem(n, 0, ((),))
    return construct_recurrent_se(n, t)


def _contains_stopping_set(h, n):
    """For every mask, whether some nonempty stopping set lies inside it."""
    masks = np.arange(1 << n)
    pc = np.array([bin(m).count("1") for m in range(1 << n)])
    stop = np.ones(1 << n, dtype=bool)
    stop[0] = False
    for r in h.supports:
        stop &= pc[masks & r] != 1
    inside = stop.copy()
    for j in range(n):
        v = inside.reshape(-1, 2, 1 << j)
        v[:, 1, :] |= v[:, 0, :]
    return inside


def _coding_failures():
    bad = []
    for n in range(3, 11):
        primes = [q for q in range(n, PRIME_CEILING + 1) if gmpy2.is_prime(q)]
        for q, d in itertools.product(primes, range(2, min(5, n) + 1)):
            spec = CodeSpec.rs(n, d, q)
            h = build_h_from_se(spec, _se_system(n, d - 2))
            if h.rank != n - spec.k or stopping_distance(h) != d:
                bad.append(("rank or s(H)", n, q, d))
                continue
            inside = _contains_stopping_set(h, n)
            for m in range(1 << n):
                erased = [j + 1 for j in range(n) if m >> j & 1]
                if peel_decode(h, erased).recovered == bool(inside[m]):
                    bad.append(("peel", n, q, d, m))
                    break
            heavy = tuple(codeword_with_support(spec, tuple(range(1, w + 1)))
                          for w in range(spec.dual_distance + 1, n + 1))
            for row in heavy:
                one = replace_nonmin_rows(spec, ParityCheckMatrix(q, n, (row,)))
                if len(one) > replacement_cap(spec):
                    bad.append(("cap", n, q, d))
            mixed = ParityCheckMatrix(q, n, h.rows + heavy)
            out = replace_nonmin_rows(spec, mixed)
            if out.stopping_distance < mixed.stopping_distance or out.rank != mixed.rank:
                bad.append(("replace", n, q, d))
            if any(s.bit_count() != spec.dual_distance for s in out.supports):
                bad.append(("replace weight", n, q, d))
    return bad


def test_criterion_6_coding_equivalence(acceptance_log):
    with criterion(acceptance_log, 6, f"coding checks for primes n <= q <= {PRIME_CEILING}, "
                                      "n <= 10, d <= 5"):
        assert _coding_failures() == []


def test_criterion_7_full_sweep(acceptance_log):
    with criterion(acceptance_log, 7, "sweep to n=512 under 10 min, consistent, reproducible"):
        start = time.perf_counter()
        first = "".join(sweep_lines(512, jobs=1))
        elapsed = time.perf_counter() - start
        print(f"sweep to n=512 took {elapsed:.1f}s")
        assert elapsed < SWEEP_SECONDS, f"{elapsed:.1f}s"
        rows = list(csv.DictReader(io.StringIO(first)))
        assert len(rows) == sum(n - 5 for n in range(6, 513))
        for r in rows:
            lower = max(int(r[c]) for c in B.LOWER_NAMES)
            upper = min(int(r[c]) for c in B.UPPER_NAMES if r[c])
            assert lower <= upper, (r["n"], r["d"])
        second = "".join(sweep_lines(512, jobs=2))
        assert second == first


def test_criterion_8_property_suite(acceptance_log):
    with criterion(acceptance_log, 8, "draw vs probabilistic, eta and ratio regressions"):
        for n in range(6, 17):
            for d in range(6, n + 1):
                draw = B.draw_bound_min(n, d - 2, False).value
                prob = B.prob_bound_min(n, d - 2).value
                assert draw < prob + 2, (n, d, draw, prob)
        eta = B.eta_decomposition(100, 10)
        assert abs(float(eta.dominant_ratio) / ETA_DOMINANT_RATIO_100_10 - 1) <= 1e-6
        assert abs(float(eta.terms[-1]) / ETA_LAST_TERM_100_10 - 1) <= 1e-6
        ratios = {k: B.recurrent_c_over_simple(200, k) for k in (3, 4, 5)}
        assert ratios == RECURRENT_C_RATIOS_200
        # (k+1)/k falls with k, and so do the measured ratios
        assert ratios[3] > ratios[4] > ratios[5]
