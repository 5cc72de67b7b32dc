"""Upper and lower bounds on S(n,t), T(n,t+1,t) and the stopping redundancy.

Closed forms are evaluated in exact rationals and floored (upper bounds) or
ceiled (lower bounds).  Anything involving powers, logarithms or gamma
functions goes through MPFR with directed rounding: upper bounds round every
intermediate up, so the floored integer is still a valid bound.

Parameter searches (p, l, l_i) run in float64 and only pick the point; the
reported value is always re-evaluated rigorously at that point.  Searches
are vectorized over every t of one n (the ``*_row`` functions).  A single
cell goes through the same code with a one-element row, so it gets the same
answer alone or inside a sweep.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .combinat import (
    binomial,
    ceil_div,
    ceil_q,
    context,
    decaen_lower,
    ext,
    ext_floor,
    floor_q,
    opposite,
    pascal_row,
    phi,
    schoenheim_lower,
    simple_lower,
    work_precision,
)

LN2 = math.log(2.0)
# Terms whose natural log is estimated below this are bounded en bloc.
NEGLIGIBLE_LN = -60.0
GOLDEN_RTOL = 1e-12
# Recurrent B: largest l tried for any single term.
RECURRENT_B_LCAP = 10**6
# Draw bounds: above this many t-subsets the integer scan around l* is skipped.
DRAW_SCAN_MAX = 2**50

UPPER_NAMES = (
    "probabilistic",
    "draw_norepl",
    "construction_a",
    "construction_b",
    "recurrent_a",
    "recurrent_b",
    "recurrent_c",
    "schwartz_vardy_upper",
)
LOWER_NAMES = ("schwartz_vardy_lower", "simple_lower", "schoenheim", "decaen", "se_lower")
# draw_norepl is reported but never wins: it sits within two of the
# probabilistic bound and is not one of the compared rows.
WINNER_NAMES = tuple(n for n in UPPER_NAMES if n != "draw_norepl")


@dataclass(frozen=True)
class BoundResult:
    name: str
    kind: str  # "upper" or "lower"
    value: int
    raw: object = None
    params: dict = field(default_factory=dict)
    target: str = "S"


def _upper(name, raw, params=None, target="S") -> BoundResult:
    v = floor_q(raw) if isinstance(raw, (int, Fraction)) else ext_floor(raw)
    return BoundResult(name, "upper", v, raw, dict(params or {}), target)


def _check_se(n: int, t: int) -> None:
    if not 0 < t < n:
        raise ValueError(f"need 0 < t < n, got n={n} t={t}")


def _check_k(n: int, k: int) -> None:
    if not 0 < k < n - 1:
        raise ValueError(f"need 0 < k < n-1, got n={n} k={k}")


# ------------------------------------------------------------ float helpers


@lru_cache(maxsize=None)
def _lgamma_table(size: int) -> np.ndarray:
    return np.array([math.lgamma(k + 1) for k in range(size)])


def _ln_binom(a, b) -> np.ndarray:
    """Elementwise ln C(a, b) as floats, -inf where the binomial is zero."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lg = _lgamma_table(max(int(a.max(initial=0)), 0) + 2)
    ok = (b >= 0) & (b <= a) & (a >= 0)
    aa, bb = np.where(ok, a, 0), np.where(ok, b, 0)
    return np.where(ok, lg[aa] - lg[bb] - lg[aa - bb], -np.inf)


def _negligible(ests: np.ndarray, scale: float, rounding: str, prec: int) -> np.ndarray:
    """Terms that are tiny both absolutely and next to ``scale`` (a log)."""
    if rounding == "nearest":
        return np.zeros(len(ests), dtype=bool)
    return ests < max(NEGLIGIBLE_LN, scale - (prec + 40) * LN2)


def _lump(ests: np.ndarray, mode: str, prec: int) -> mpfr:
    """Rigorous stand-in for a sum of terms whose logs are estimated by ``ests``.

    Upward it is count * exp(max estimate + slack); downward the terms are
    simply dropped.
    """
    if not len(ests) or mode == "down":
        return ext(0, mode, prec)
    top = float(np.max(ests))
    top += 1e-9 * abs(top) + 1.0
    with context("up", prec):
        return len(ests) * gmpy2.exp(mpfr(top))


@lru_cache(maxsize=512)
def _exact_terms(n: int, t: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(C(n,i), phi(n,t,i)) for i = 1..t+1."""
    # phi(n,t,i) = i C(n-i, t-i+1), read straight off the Pascal rows
    return (tuple(pascal_row(n)[1:t + 2]),
            tuple(i * pascal_row(n - i)[t - i + 1] for i in range(1, t + 2)))


def _as_mpq(p) -> mpq:
    if isinstance(p, Fraction):
        return mpq(p.numerator, p.denominator)
    if isinstance(p, (float, np.floating)):
        return mpq(*float(p).as_integer_ratio())
    return mpq(p)


@dataclass(frozen=True)
class _Packed:
    """The t+1 terms of every cell of a row, laid end to end."""

    seg: np.ndarray  # cell index of each term
    lnc: np.ndarray  # ln C(n, i)
    ph: np.ndarray  # phi(n, t, i) as a float
    big: np.ndarray  # C(n, t) per cell, as a float

    def subset(self, keep: np.ndarray) -> "_Packed":
        return _Packed(self.seg[keep], self.lnc[keep], self.ph[keep], self.big)

    def sums(self, values: np.ndarray) -> np.ndarray:
        return np.bincount(self.seg, values, minlength=len(self.big))


def _packed(n: int, ts: np.ndarray) -> _Packed:
    sizes = ts + 1
    seg = np.repeat(np.arange(len(ts)), sizes)
    starts = np.cumsum(sizes) - sizes
    i = np.arange(len(seg)) - starts[seg] + 1
    lnc = _ln_binom(np.full_like(i, n), i)
    ph = np.exp(np.log(i) + _ln_binom(n - i, ts[seg] - i + 1))
    return _Packed(seg, lnc, ph, np.exp(_ln_binom(np.full_like(ts, n), ts)))


def _golden_vec(f, a: np.ndarray, b: np.ndarray, rtol: float = GOLDEN_RTOL) -> np.ndarray:
    """Elementwise golden-section minimization of f on [a, b]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while True:
        live = (b - a) > rtol * np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
        if not live.any():
            return (a + b) / 2.0
        left = live & (fc <= fd)
        right = live & ~(fc <= fd)
        b = np.where(left, d, b)
        d = np.where(left, c, d)
        fd = np.where(left, fc, fd)
        a = np.where(right, c, a)
        c = np.where(right, d, c)
        fc = np.where(right, fd, fc)
        x = np.where(left, b - g * (b - a), a + g * (b - a))
        fx = f(x)
        c = np.where(left, x, c)
        fc = np.where(left, fx, fc)
        d = np.where(right, x, d)
        fd = np.where(right, fx, fd)


def _unimodal(vals: np.ndarray) -> bool:
    s = np.sign(np.diff(vals))
    s = s[s != 0]
    return not np.any((s[:-1] > 0) & (s[1:] < 0))


def _bracket(grid: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    j = int(np.argmin(vals))
    return float(grid[max(j - 1, 0)]), float(grid[min(j + 1, len(grid) - 1)])


# ------------------------------------------------------ probabilistic bound


def prob_bound(n: int, t: int, p, rounding: str = "up"):
    """p*C(n,t) + sum_i C(n,i) (1-p)^phi(n,t,i), rounded toward ``rounding``."""
    _check_se(n, t)
    q = _as_mpq(p)
    if not 0 <= q <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    prec = work_precision(n)
    big = binomial(n, t)
    first = ext(q * big, rounding, prec)
    if q == 1:
        return first
    pk = _packed(n, np.array([t]))
    ests = pk.lnc + pk.ph * math.log1p(-float(q))
    scale = max(float(ests.max()), math.log(float(q) * big) if q else -math.inf)
    skip = _negligible(ests, scale, rounding, prec)
    inward = opposite(rounding)
    binoms, phis = _exact_terms(n, t)
    with context(rounding, prec):
        lg = gmpy2.log(mpfr(1 - q))
    total = first
    for idx in np.flatnonzero(~skip):
        e = ext(phis[idx], inward, prec)
        with context(rounding, prec):
            total += binoms[idx] * gmpy2.exp(e * lg)
    lumped = _lump(ests[skip], rounding, prec)
    with context(rounding, prec):
        return total + lumped


def p_min(n: int, t: int) -> float:
    return 1.0 - (n - t) ** (-1.0 / t)


def _prob_objective(pk: _Packed):
    def f(p):
        with np.errstate(divide="ignore", invalid="ignore"):
            ex = np.where(pk.ph > 0, pk.ph * np.log1p(-p[pk.seg]), 0.0)
        return p * pk.big + pk.sums(np.exp(pk.lnc + ex))
    return f


def _prob_search(n: int, ts: np.ndarray) -> np.ndarray:
    """p* per cell: 64-point scan plus p_min, then golden section.

    A cell whose coarse scan is not unimodal is rescanned on 4097 points
    before bracketing.
    """
    ts = np.asarray(ts, dtype=np.int64)
    pk = _packed(n, ts)
    f = _prob_objective(pk)
    base = np.linspace(0.0, 1.0, 64)
    grids = [np.unique(np.append(base, p_min(n, t))) for t in ts.tolist()]
    width = max(len(g) for g in grids)
    grid = np.array([np.pad(g, (0, width - len(g)), mode="edge") for g in grids])
    vals = np.column_stack([f(grid[:, j]) for j in range(width)])
    lo = np.empty(len(ts))
    hi = np.empty(len(ts))
    for r, t in enumerate(ts.tolist()):
        if _unimodal(vals[r]):
            lo[r], hi[r] = _bracket(grid[r], vals[r])
        else:
            fine = np.linspace(0.0, 1.0, 4097)
            one = _prob_objective(_packed(n, np.array([t])))
            lo[r], hi[r] = _bracket(fine, np.array([one(np.array([x]))[0] for x in fine]))
    # terms only shrink as p grows, so their size at the left end bounds them
    with np.errstate(divide="ignore", invalid="ignore"):
        at_lo = pk.lnc + np.where(pk.ph > 0, pk.ph * np.log1p(-lo[pk.seg]), 0.0)
    keep = at_lo > np.log(f(lo))[pk.seg] - 80.0
    return _golden_vec(_prob_objective(pk.subset(keep)), lo, hi)


def prob_bound_min_row(n: int, ts: Sequence[int],
                       p_stars: Sequence[float] | None = None) -> list[BoundResult]:
    ts = np.asarray(ts, dtype=np.int64)
    ps = _prob_search(n, ts) if p_stars is None else np.asarray(p_stars, dtype=float)
    return [_upper("probabilistic", prob_bound(n, t, p, "up"), {"p": p})
            for t, p in zip(ts.tolist(), ps.tolist())]


def prob_bound_min(n: int, t: int) -> BoundResult:
    """Minimize the probabilistic bound over p; golden section seeded at p_min."""
    _check_se(n, t)
    return prob_bound_min_row(n, [t])[0]


# ------------------------------------------------------------- draw bounds


def _ratio_product(big: int, ph: int, l: int):
    """C(N-l, phi) / C(N, phi) as an exact mpq, or None if that is costly."""
    if big - l < ph:
        return mpq(0)
    if min(l, ph) > 64:
        return None
    num = den = mpz(1)
    if ph <= l:
        for j in range(ph):
            num *= big - l - j
            den *= big - j
    else:
        for j in range(l):
            num *= big - ph - j
            den *= big - j
    return mpq(num, den)


def _ln_ratio_product(big: int, ph: int, l: int, mode: str, prec: int,
                      ln_scale: float = math.inf) -> mpfr:
    """ln C(N-l, phi) - ln C(N, phi), rounded toward ``mode``.

    Each factor 1 - l/(N-j), j < phi, lies between 1 - l/N and
    1 - l/(N-phi+1), so the matching power is a rigorous one-sided value.
    It is used when the two powers agree below the working precision, or
    (directed modes only) when the gap times exp(ln_scale), the size of
    the term this ratio multiplies, is below exp(NEGLIGIBLE_LN).
    Otherwise lgammas are used.
    """
    inward = opposite(mode)
    spread = ph * l * (ph - 1) / (big * (big - ph + 1)) if big > ph else math.inf
    tiny = mode != "nearest" and 0 < spread < 1 and ln_scale + math.log(spread) < NEGLIGIBLE_LN
    if spread < 2.0 ** -(prec + 8) or tiny:
        den = big if mode != "down" else big - ph + 1
        with context(mode, prec):
            return ph * gmpy2.log(mpfr(mpq(den - l, den)))
    acc = ext(0, mode, prec)
    with context(mode, prec):
        for x in (big - l + 1, big - ph + 1):
            acc = acc + _lgamma(x, mode, prec)
        for x in (big - l - ph + 1, big + 1):
            acc = acc - _lgamma(x, inward, prec)
    return acc


# Above this, ln Gamma comes from the Stirling series instead of MPFR's lgamma.
STIRLING_MIN = 2**64


@lru_cache(maxsize=4096)
def _lgamma(x: int, mode: str, prec: int) -> mpfr:
    """ln Gamma(x) for an integer x >= 1, rounded toward ``mode``."""
    # several terms of one draw bound share arguments, hence the cache
    if x >= STIRLING_MIN and x.bit_length() < prec:
        return _stirling_lgamma(x, mode, prec)
    with context(mode, prec):
        return gmpy2.lgamma(mpfr(x))[0]


@lru_cache(maxsize=1)
def _bernoulli_even(count: int) -> tuple[mpq, ...]:
    """B_2, B_4, ..., B_{2 count}."""
    b = [mpq(1)]
    for m in range(1, 2 * count + 1):
        b.append(-sum(binomial(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return tuple(b[2::2])


def _stirling_lgamma(x: int, mode: str, prec: int) -> mpfr:
    """(x - 1/2) ln x - x + ln(2 pi)/2 + sum_k B_2k / (2k (2k-1) x^(2k-1)).

    For real x > 0 the error after K terms has the sign of, and is smaller
    than, the first omitted term, so adding its absolute value (upward) or
    subtracting it (downward) gives a rigorous one-sided value.  The tail
    is summed exactly in rationals; x is exact at this precision.
    """
    bern = _bernoulli_even(24)
    # stop once the next term is far below the resolution of the result
    target = x.bit_length() + 8 - prec
    series = mpq(0)
    for k in range(1, len(bern)):
        m = 2 * k
        series += bern[k - 1] / (m * (m - 1) * mpz(x) ** (m - 1))
        nxt = abs(bern[k]) / ((m + 2) * (m + 1) * mpz(x) ** (m + 1))
        if nxt.numerator.bit_length() - nxt.denominator.bit_length() < target:
            break
    if mode == "up":
        series += nxt
    elif mode == "down":
        series -= nxt
    with context(mode, prec):
        z = mpfr(x)
        head = (z - mpq(1, 2)) * gmpy2.log(z) - z
        return head + _half_ln_2pi(mode, prec) + mpfr(series)


@lru_cache(maxsize=16)
def _half_ln_2pi(mode: str, prec: int) -> mpfr:
    with context(mode, prec):
        return gmpy2.log(2 * gmpy2.const_pi()) / 2


def draw_bound(n: int, t: int, l: int, with_replacement: bool, rounding: str = "up"):
    """l + sum_i C(n,i) P_i(l), P_i the chance an i-subset survives l draws."""
    return draw_bound_run(n, t, l, 1, with_replacement, rounding)[0]


def draw_bound_run(n: int, t: int, l: int, count: int, with_replacement: bool,
                   rounding: str = "up") -> list:
    """:func:`draw_bound` at l, l+1, ..., l+count-1.

    Only the first point is evaluated from scratch.  Each later term is the
    previous one times (N-phi)/N with replacement, or (N-l-phi)/(N-l)
    without.  Terms shrink as l grows, so the negligible tail bounded at
    the first point still bounds it further along.
    """
    _check_se(n, t)
    big = binomial(n, t)
    last = l + count - 1
    if count < 1 or l < 0 or (not with_replacement and last > big):
        raise ValueError(f"l={l}..{last} out of range for N={big}")
    prec = work_precision(n) + big.bit_length() + 16
    pk = _packed(n, np.array([t]))
    # either way P_i <= exp(-l phi / N)
    ests = pk.lnc - l * (pk.ph / float(big))
    scale = max(float(ests.max()), math.log(l) if l else -math.inf)
    skip = _negligible(ests, scale, rounding, prec)
    binoms, phis = _exact_terms(n, t)
    live = [int(i) for i in np.flatnonzero(~skip)]
    terms = []
    for idx in live:
        ph, c = phis[idx], binoms[idx]
        if with_replacement:
            with context(rounding, prec):
                term = c * mpfr(mpq(big - ph, big)) ** mpz(l)
        else:
            r = _ratio_product(big, ph, l)
            if r is not None:
                with context(rounding, prec):
                    term = c * mpfr(r)
            else:
                lnr = _ln_ratio_product(big, ph, l, rounding, prec, float(ests[idx]))
                with context(rounding, prec):
                    term = c * gmpy2.exp(lnr)
        terms.append(term)
    lumped = _lump(ests[skip], rounding, prec)
    out = []
    for step in range(count):
        at = l + step
        if step:
            for j, idx in enumerate(live):
                ph = phis[idx]
                if with_replacement:
                    factor = mpq(big - ph, big)
                else:
                    factor = mpq(max(big - at + 1 - ph, 0), big - at + 1)
                with context(rounding, prec):
                    terms[j] = terms[j] * mpfr(factor)
        with context(rounding, prec):
            total = ext(at, rounding, prec) + gmpy2.fsum(terms) if terms else ext(at, rounding, prec)
            out.append(total + lumped)
    return out


def _draw_objective(pk: _Packed, with_replacement: bool):
    big = pk.big[pk.seg]

    def f(l):
        le = l[pk.seg]
        with np.errstate(divide="ignore", invalid="ignore"):
            if with_replacement:
                ex = np.where(le == 0, 0.0, le * np.log1p(-pk.ph / big))
            else:
                # midpoint surrogate for prod_j (1 - l/(N-j)), j < phi
                ex = pk.ph * np.log1p(-le / (big - (pk.ph - 1) / 2.0))
                ex = np.where(big - le < pk.ph, -np.inf, ex)
        return l + pk.sums(np.exp(pk.lnc + ex))
    return f


def draw_bound_min_row(n: int, ts: Sequence[int], with_replacement: bool,
                       p_stars: Sequence[float] | None = None,
                       prob_values: Sequence[int] | None = None) -> list[BoundResult]:
    """Minimize a draw bound over integer l, for several t of one n.

    Golden section runs on a float surrogate, bracketed around p* C(n,t)
    with p* the probabilistic optimum.  The rigorous value is the best of
    the draw bound at l0 = ceil(p* C(n,t)) and an integer scan around the
    surrogate optimum (+-2 when C(n,t) <= 2**50, else its floor and ceiling).

    Without replacement, C(N-l0, phi) / C(N, phi) <= (1 - l0/N)**phi
    <= (1 - p*)**phi, so the bound at l0 is at most the probabilistic bound
    at p* plus one.  When ``prob_values`` (those floored probabilistic
    bounds) are given, l0 is only evaluated if the scan does not already
    beat that guarantee.
    """
    ts = np.asarray(ts, dtype=np.int64)
    ps = _prob_search(n, ts) if p_stars is None else np.asarray(p_stars, dtype=float)
    pk = _packed(n, ts)
    seed = ps * pk.big
    lo = seed / 4
    hi = np.where(seed > 0, np.minimum(pk.big, seed * 4 + 4), pk.big)
    f = _draw_objective(pk, with_replacement)
    with np.errstate(divide="ignore"):
        ests = pk.lnc - lo[pk.seg] * pk.ph / pk.big[pk.seg]
    keep = ests > np.log(f(lo))[pk.seg] - 80.0
    fa = _draw_objective(pk.subset(keep), with_replacement)
    l_star = _golden_vec(fa, lo, hi)
    name = "draw_repl" if with_replacement else "draw_norepl"
    out = []
    for j, (t, p, ls) in enumerate(zip(ts.tolist(), ps.tolist(), l_star.tolist())):
        big = binomial(n, t)
        l0 = min(ceil_q(Fraction(p) * big), big)
        base = int(ls)
        span = range(base - 2, base + 4) if big <= DRAW_SCAN_MAX else (base, base + 1)
        cands = {x for x in span if 0 <= x <= big}
        lazy = prob_values is not None and not with_replacement
        if not lazy:
            cands.add(l0)
        scored = []
        for lo_l, run in _runs(sorted(cands)):
            vals = draw_bound_run(n, t, lo_l, run, with_replacement, "up")
            scored += [(v, lo_l + k) for k, v in enumerate(vals)]
        if lazy and min(scored)[0] >= int(prob_values[j]) + 1:
            scored.append((draw_bound(n, t, l0, False, "up"), l0))
        best = min(scored)
        out.append(_upper(name, best[0], {"l": best[1]}))
    return out


def _runs(values: Sequence[int]) -> list[tuple[int, int]]:
    """Sorted integers as (start, length) runs of consecutive values."""
    out: list[tuple[int, int]] = []
    for v in values:
        if out and out[-1][0] + out[-1][1] == v:
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((v, 1))
    return out


def draw_bound_min(n: int, t: int, with_replacement: bool) -> BoundResult:
    _check_se(n, t)
    return draw_bound_min_row(n, [t], with_replacement)[0]


# ------------------------------------------------------ eta decomposition


@dataclass(frozen=True)
class EtaDecomposition:
    n: int
    t: int
    p_min: mpfr
    terms: tuple[mpfr, ...]  # f(1) .. f(t+1)
    eta: mpfr
    dominant_ratio: mpfr
    bound6: mpfr


def eta_decomposition(n: int, t: int) -> EtaDecomposition:
    """Terms of eta(n,t) at p = p_min and the assembled bound."""
    _check_se(n, t)
    prec = work_precision(n)
    with context("nearest", prec):
        ln_nt = gmpy2.log(mpfr(n - t))
        terms = []
        for i in range(1, t + 2):
            c = binomial(n - i, n - t - 1)
            e = -mpfr(i * c) / t * ln_nt
            terms.append(gmpy2.exp(e) * binomial(t + 1, i) / c)
        s = gmpy2.fsum(terms)
        eta = mpfr(n - t) / (t + 1) * s
        pm = 1 - gmpy2.exp(-ln_nt / t)
        bound6 = (pm + eta) * binomial(n, t)
        return EtaDecomposition(n, t, pm, tuple(terms), eta, terms[-1] / s, bound6)


def log_point_split(n: int, t: int) -> tuple[mpfr, mpfr]:
    """(first term, remaining sum) of the probabilistic bound at p = ln(n)/n."""
    _check_se(n, t)
    p = math.log(n) / n
    total = prob_bound(n, t, p, "nearest")
    with context("nearest", work_precision(n)):
        first = mpfr(_as_mpq(p) * binomial(n, t))
        return first, total - first


# ------------------------------------------------ Kim-Roush construction


def _kr_lmin(n: int, t: int) -> int:
    if not 0 < t < n - 2:
        raise ValueError(f"need 0 < t < n-2, got n={n} t={t}")
    return ceil_div(n, n - t - 2)


def kim_roush_raw(n: int, t: int, l: int, variant: str = "exact") -> Fraction:
    if l < _kr_lmin(n, t) or l > n:
        raise ValueError(f"need n/(n-t-2) <= l <= n, got l={l}")
    a, b = n // l, ceil_div(n, l)
    head = Fraction(binomial(n, t), l)
    if variant == "exact":
        return head + l * (binomial(n - a, t) - binomial(n - a - b, t - b))
    if variant == "loose":
        return head + l * b * binomial(n - a - 1, t)
    raise ValueError(f"unknown variant {variant!r}")


def kim_roush_bound(n: int, t: int, l: int, variant: str = "exact") -> int:
    return floor_q(kim_roush_raw(n, t, l, variant))


def _row_argmins(vals: np.ndarray, valid: np.ndarray, raw: Callable[[int, int], Fraction],
                 ls: np.ndarray, ts: np.ndarray) -> list[tuple[Fraction, int]]:
    """Exact minimum per row over the l whose float value is within 1e-9 of the row's best."""
    v = np.where(valid, vals, np.inf)
    mins = v.min(axis=1)
    out = []
    for r, t in enumerate(ts.tolist()):
        cands = ls[v[r] <= mins[r] * (1 + 1e-9)].tolist()
        out.append(min((raw(t, l), l) for l in cands))
    return out


def kim_roush_min_row(n: int, ts: Sequence[int], variant: str = "exact") -> list[BoundResult]:
    ts = np.asarray(ts, dtype=np.int64)
    lmins = np.array([_kr_lmin(n, t) for t in ts.tolist()])
    ls = np.arange(1, n + 1)
    a, b = (n // ls)[None, :], (-(-n // ls))[None, :]
    T = ts[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        if variant == "exact":
            tail = np.exp(_ln_binom(n - a, T)) - np.exp(_ln_binom(n - a - b, T - b))
        elif variant == "loose":
            tail = b * np.exp(_ln_binom(n - a - 1, T))
        else:
            raise ValueError(f"unknown variant {variant!r}")
        vals = np.exp(_ln_binom(n, T)) / ls + ls * tail
    valid = ls[None, :] >= lmins[:, None]
    best = _row_argmins(vals, valid, lambda t, l: kim_roush_raw(n, t, l, variant), ls, ts)
    return [_upper("construction_a", raw, {"l": l, "variant": variant}) for raw, l in best]


def kim_roush_min(n: int, t: int, variant: str = "exact") -> BoundResult:
    """Minimum over n/(n-t-2) <= l <= n; floats pick candidates, Fractions decide."""
    return kim_roush_min_row(n, [t], variant)[0]


# ---------------------------------------------- Frankl-Rodl construction


def _fr_range(n: int, t: int, l: int) -> tuple[int, int]:
    return ceil_div(t + 1, ceil_div(n, l)), ceil_div(t + 1, n // l)


def frankl_rodl_g(n: int, t: int, l: int) -> int:
    lo, hi = _fr_range(n, t, l)
    return sum(binomial(l, i) * i * (i - 1) for i in range(lo, hi + 1))


def frankl_rodl_raw(n: int, t: int, l: int) -> Fraction:
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}")
    a = n // l
    return (Fraction(binomial(n, t), l) + binomial(n - a, t) + binomial(n - a, t - a)
            + frankl_rodl_g(n, t, l))


def frankl_rodl_bound(n: int, t: int, l: int) -> int:
    return floor_q(frankl_rodl_raw(n, t, l))


@lru_cache(maxsize=2)
def _g_prefix(n: int) -> np.ndarray:
    """prefix[l, i] = sum_{j <= i} C(l, j) j (j-1) in floats, for l, i <= n."""
    ls = np.broadcast_to(np.arange(n + 1)[:, None], (n + 1, n + 1))
    js = np.broadcast_to(np.arange(n + 1)[None, :], (n + 1, n + 1))
    with np.errstate(over="ignore"):
        terms = np.exp(_ln_binom(ls, js)) * js * (js - 1)
    return np.cumsum(terms, axis=1)


def frankl_rodl_min_row(n: int, ts: Sequence[int]) -> list[BoundResult]:
    ts = np.asarray(ts, dtype=np.int64)
    ls = np.arange(1, n + 1)
    a, b = (n // ls)[None, :], (-(-n // ls))[None, :]
    T = ts[:, None]
    lo = -(-(T + 1) // b)
    hi = -(-(T + 1) // a)
    pre = _g_prefix(n)
    L = np.broadcast_to(ls[None, :], lo.shape)
    g = np.where(hi >= lo, pre[L, np.minimum(hi, n)] - pre[L, np.clip(lo - 1, 0, n)], 0.0)
    with np.errstate(over="ignore"):
        vals = (np.exp(_ln_binom(n, T)) / ls + np.exp(_ln_binom(n - a, T))
                + np.exp(_ln_binom(n - a, T - a)) + g)
    valid = np.ones(vals.shape, dtype=bool)
    best = _row_argmins(vals, valid, lambda t, l: frankl_rodl_raw(n, t, l), ls, ts)
    return [_upper("construction_b", raw, {"l": l}) for raw, l in best]


def frankl_rodl_min(n: int, t: int) -> BoundResult:
    _check_se(n, t)
    return frankl_rodl_min_row(n, [t])[0]


# ---------------------------------------------------- recursive bounds


def kuzjurin_bound(n: int, k: int) -> int:
    """floor(C(n,k-1)/k + (k-1)/k * C(n-1,k-2)), an upper bound on C(n,k,k-1)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n} k={k}")
    return floor_q(Fraction(binomial(n, k - 1) + (k - 1) * binomial(n - 1, k - 2), k))


def default_covering_provider(i: int, k: int) -> int:
    if k == 1:
        return 1
    if k == 2:
        return ceil_div(i, 2)
    return kuzjurin_bound(i, k)


def recurrent_sum(n: int, t: int,
                  provider: Callable[[int, int], int] = default_covering_provider) -> int:
    """Sum of C(i, k, k-1) over i = k..n-1 with k = n-t-1, via ``provider``."""
    if not 0 < t < n - 1:
        raise ValueError(f"need 0 < t < n-1, got n={n} t={t}")
    k = n - t - 1
    total = 0
    for i in range(k, n):
        v = provider(i, k)
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"provider gave {v!r} for C({i},{k},{k - 1})")
        total += int(v)
    return total


def recurrent_a(n: int, k: int) -> BoundResult:
    """((1 + ln k)/k) (C(n,k) - 1), rounded up then floored."""
    _check_k(n, k)
    n, k = int(n), int(k)
    with context("up", work_precision(n)):
        raw = (1 + gmpy2.log(mpfr(k))) / k * (binomial(n, k) - 1)
    return _upper("recurrent_a", raw, {"k": k})


def recurrent_c(n: int, k: int) -> BoundResult:
    _check_k(n, k)
    raw = Fraction(binomial(n, k) + (k - 1) * binomial(n - 1, k - 1), k) - 1
    return _upper("recurrent_c", raw, {"k": k})


def _rb_lmin(m: int, i: int) -> int:
    # l - 1 - l(i-1)/(m+i) > 0  <=>  l (m+1) > m + i
    return max(2, (m + i) // (m + 1) + 1)


def _rb_exact(m: int, i: int, l: int) -> mpq:
    frac = mpq(i * (m + i), l * (m + 1) - m - i)
    return (mpq(1, 2 * l) + (3 + frac) / 2 * mpq(l - 1, l) ** i) * binomial(m + i, i)


def _floor_mpq(v: mpq) -> int:
    return int(v.numerator // v.denominator)


def recurrent_b_term(m: int, i: int, l: int) -> Fraction:
    """The i-th summand of the bound for a given l, exactly."""
    if l < _rb_lmin(m, i):
        raise ValueError(f"l={l} outside the valid range for m={m}, i={i}")
    v = _rb_exact(m, i, l)
    return Fraction(int(v.numerator), int(v.denominator))


def _rb_shape(m: int, i: int, l: int) -> float:
    return (1 / (2 * l) + 0.5 * (3 + i * (m + i) / (l * (m + 1) - m - i))
            * math.exp(i * math.log1p(-1 / l)))


def _rb_float_argmin(m: int, i: int) -> int:
    """Integer l in [lmin, cap] minimizing the term shape, in floats.

    The shape falls to a local minimum, may rise to a peak, then tends to
    3/2.  A doubling walk finds the first rise, a ternary search pins the
    local minimum, and the cap covers a tail that dips lower.
    """
    cap = RECURRENT_B_LCAP
    lmin = _rb_lmin(m, i)

    def h(l):
        return _rb_shape(m, i, l)

    prev2 = prev = lmin
    hp, step = h(lmin), 1
    while True:
        nxt = min(prev + step, cap)
        hn = h(nxt)
        if hn > hp or nxt == cap:
            break
        prev2, prev, hp = prev, nxt, hn
        step *= 2
    if hn <= hp:
        return cap
    a, b = prev2, nxt
    while b - a > 2:
        c, d = a + (b - a) // 3, b - (b - a) // 3
        if h(c) <= h(d):
            b = d
        else:
            a = c
    local = min(range(a, b + 1), key=lambda l: (h(l), l))
    return local if h(local) <= h(cap) else cap


@lru_cache(maxsize=None)
def recurrent_b_term_min(m: int, i: int) -> tuple[int, int]:
    """(floor of the smallest i-th term, its l) over valid integer l up to the cap.

    For i = 0 the term is 1/(2l) + 3/2 with no attained minimum; the cap is
    used and the floor is 1.
    """
    if i == 0:
        return 1, RECURRENT_B_LCAP
    best = _rb_float_argmin(m, i)
    cands = range(max(_rb_lmin(m, i), best - 2), min(RECURRENT_B_LCAP, best + 2) + 1)
    return min((_floor_mpq(_rb_exact(m, i, l)), l) for l in cands)


def recurrent_b(n: int, t: int, ls: Sequence[int]) -> Fraction:
    """Sum of the exact terms for a given vector l_0..l_t."""
    if not 0 < t < n - 1:
        raise ValueError(f"need 0 < t < n-1, got n={n} t={t}")
    if len(ls) != t + 1:
        raise ValueError(f"need {t + 1} values of l, got {len(ls)}")
    m = n - t - 1
    return sum((recurrent_b_term(m, i, l) for i, l in enumerate(ls)), Fraction(0))


def recurrent_b_min(n: int, t: int) -> BoundResult:
    """Sum over i of the floored per-term minimum.

    Flooring before adding stays valid: each summand bounds an integer
    Turán number on its own.
    """
    if not 0 < t < n - 1:
        raise ValueError(f"need 0 < t < n-1, got n={n} t={t}")
    m = n - t - 1
    parts = [recurrent_b_term_min(m, i) for i in range(t + 1)]
    value = sum(v for v, _ in parts)
    return BoundResult("recurrent_b", "upper", value, value, {"l": [l for _, l in parts]})


def turan_to_se(n: int, t: int, turan_upper: int) -> int:
    """floor((1 - t/n) T + C(n-1, t-1)) for an upper bound T on T(n,t+1,t)."""
    if not 0 < t < n - 1:
        raise ValueError(f"need 0 < t < n-1, got n={n} t={t}")
    return floor_q(Fraction(n - t, n) * turan_upper + binomial(n - 1, t - 1))


# ------------------------------------------------------------ lower bounds


def schwartz_vardy(n: int, d: int) -> tuple[int, int]:
    """(lower, upper) from the classic bounds for d >= 3."""
    if not 3 <= d <= n:
        raise ValueError(f"need 3 <= d <= n, got n={n} d={d}")
    c = binomial(n, d - 2)
    # the lower bound is strict: one more than the floor
    lower = c // (d - 1) + 1
    upper = floor_q(Fraction(max(n - d + 2, d - 1) * c, n))
    return lower, upper


def se_lower(n: int, t: int) -> int:
    """ceil(C(n,t+1) / (n - t - t/n + 1/2))."""
    _check_k(n, n - t - 1)
    return ceil_q(binomial(n, t + 1) / (Fraction(n - t) - Fraction(t, n) + Fraction(1, 2)))


def se_lower_k(n: int, k: int) -> int:
    """The same bound as :func:`se_lower` with k = n - t - 1."""
    _check_k(n, k)
    return ceil_q(binomial(n, k) / (k + Fraction(k + 1, n) + Fraction(1, 2)))


def se_lower_from_turan(n: int, t: int, turan_lower: int) -> int:
    """Lower bound on S(n,t) from any lower bound on T(n-1,t+1,t)."""
    _check_k(n, n - t - 1)
    h = Fraction(2 * (n - t) - 1, 2)
    num = turan_lower + binomial(n - 1, t) / h
    den = 1 + Fraction(n - t) / (n * h)
    return ceil_q(num / den)


# -------------------------------------------------------------- the table


@dataclass(frozen=True)
class BoundTable:
    n: int
    d: int
    results: dict  # name -> BoundResult, or None when not applicable
    best_upper: int
    winner: str
    best_lower: int

    @property
    def rate(self) -> float:
        return (self.n - self.d + 1) / self.n


def lower_bounds(n: int, d: int) -> dict:
    t = d - 2
    return {
        "schwartz_vardy_lower": BoundResult("schwartz_vardy_lower", "lower",
                                            schwartz_vardy(n, d)[0], target="rho"),
        "simple_lower": BoundResult("simple_lower", "lower", simple_lower(n, t), target="T"),
        "schoenheim": BoundResult("schoenheim", "lower", schoenheim_lower(n, t), target="T"),
        "decaen": BoundResult("decaen", "lower", decaen_lower(n, t), target="T"),
        "se_lower": BoundResult("se_lower", "lower", se_lower(n, t), target="S"),
    }


def upper_bounds_row(n: int, ds: Sequence[int]) -> list[dict]:
    ts = np.array([d - 2 for d in ds], dtype=np.int64)
    p_stars = _prob_search(n, ts)
    prob = prob_bound_min_row(n, ts, p_stars)
    draw = draw_bound_min_row(n, ts, False, p_stars, [r.value for r in prob])
    ka_ts = ts[ts < n - 2]
    ka = dict(zip(ka_ts.tolist(), kim_roush_min_row(n, ka_ts))) if len(ka_ts) else {}
    kb = frankl_rodl_min_row(n, ts)
    out = []
    for j, d in enumerate(ds):
        t, k = d - 2, n - d + 1
        out.append({
            "probabilistic": prob[j],
            "draw_norepl": draw[j],
            "construction_a": ka.get(t),
            "construction_b": kb[j],
            "recurrent_a": recurrent_a(n, k),
            "recurrent_b": recurrent_b_min(n, t),
            "recurrent_c": recurrent_c(n, k),
            "schwartz_vardy_upper": BoundResult("schwartz_vardy_upper", "upper",
                                                schwartz_vardy(n, d)[1], target="rho"),
        })
    return out


def upper_bounds(n: int, d: int) -> dict:
    return upper_bounds_row(n, [d])[0]


def best_bounds_row(n: int, ds: Sequence[int], strict: bool = True) -> list[BoundTable]:
    """:func:`best_bounds` for several d of one n, sharing the searches.

    ``strict=False`` widens the domain from 5 < d <= n to 3 <= d <= n,
    where every formula is still defined.
    """
    ds = [int(d) for d in ds]
    lowest = 6 if strict else 3
    for d in ds:
        if not lowest <= d <= n:
            raise ValueError(f"need {lowest} <= d <= n, got n={n} d={d}")
    out = []
    for d, ups in zip(ds, upper_bounds_row(n, ds)):
        res = {**lower_bounds(n, d), **ups}
        value, _, winner = min((res[k].value, i, k)
                               for i, k in enumerate(WINNER_NAMES) if res[k] is not None)
        lo = max(res[k].value for k in LOWER_NAMES)
        top = min(r.value for r in ups.values() if r is not None)
        if lo > top:
            raise AssertionError(f"lower bound {lo} exceeds upper bound {top} at (n,d)=({n},{d})")
        out.append(BoundTable(n, d, res, value, winner, lo))
    return out


def best_bounds(n: int, d: int) -> BoundTable:
    """Every bound at t = d-2, the smallest upper bound and the largest lower one."""
    return best_bounds_row(n, [d])[0]


# ---------------------------------------------------------- diagnostics


def recurrent_c_over_simple(n: int, k: int) -> Fraction:
    """recurrent_c(n,k) over the simple lower bound on T(n, n-k, n-k-1)."""
    return Fraction(recurrent_c(n, k).value, simple_lower(n, n - k - 1))


def shadow_over_simple(n: int, t: int) -> tuple[Fraction, Fraction]:
    """(C(n-1,t-1) / simple_lower(n,t), (t^2 + t)/n)."""
    return Fraction(binomial(n - 1, t - 1), simple_lower(n, t)), Fraction(t * t + t, n)
