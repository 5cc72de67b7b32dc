"""Exact combinatorial arithmetic, classic Turán lower bounds, directed rounding.

Counts are Python integers (arbitrary precision).  Real-valued bound
expressions are evaluated with MPFR through :mod:`gmpy2` at
:data:`PRECISION` bits with an explicit rounding direction, so that an
upper bound rounded *up* (or a lower bound rounded *down*) stays valid.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

PRECISION = 128


def work_precision(n: int) -> int:
    """Bits needed to floor a real of magnitude up to 2**n to the exact integer."""
    return PRECISION + n

Rational = Union[int, Fraction]

_ROUND = {
    "up": gmpy2.RoundUp,
    "down": gmpy2.RoundDown,
    "nearest": gmpy2.RoundToNearest,
}
_OPPOSITE = {"up": "down", "down": "up", "nearest": "nearest"}


# Pascal rows are kept for small n; sweeps hit the same binomials millions of times.
PASCAL_MAX = 600
_PASCAL: list[list[int]] = [[1]]


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError(f"binomial needs n >= 0, got n={n}")
    if k < 0 or k > n:
        return 0
    if n > PASCAL_MAX:
        return math.comb(n, k)
    while len(_PASCAL) <= n:
        prev = _PASCAL[-1]
        _PASCAL.append([1] + [a + b for a, b in zip(prev, prev[1:])] + [1])
    return _PASCAL[n][k]


def pascal_row(n: int) -> list[int]:
    """C(n, 0..n) as a shared list; do not mutate it."""
    if n > PASCAL_MAX:
        return [math.comb(n, k) for k in range(n + 1)]
    binomial(n, 0)
    return _PASCAL[n]


def phi(n: int, t: int, i: int) -> int:
    """Number of t-subsets covering a fixed i-subset: i * C(n-i, t-i+1)."""
    if not 1 <= i <= t + 1 <= n:
        raise ValueError(f"phi needs 1 <= i <= t+1 <= n, got n={n} t={t} i={i}")
    return i * binomial(n - i, t - i + 1)


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def ceil_q(x: Rational) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


def floor_q(x: Rational) -> int:
    x = Fraction(x)
    return x.numerator // x.denominator


def _check_nt(n: int, t: int) -> None:
    if not 0 < t < n:
        raise ValueError(f"need 0 < t < n, got n={n} t={t}")


def simple_lower(n: int, t: int) -> int:
    """ceil(C(n,t)/(t+1)); each block lies in n-t of the (t+1)-subsets."""
    _check_nt(n, t)
    return ceil_div(binomial(n, t), t + 1)


_SCHOENHEIM: dict[int, list[int]] = {}


def schoenheim_lower(n: int, t: int) -> int:
    """Iterated-ceiling lower bound on T(n, t+1, t).

    Built innermost-out from T(t+1, t+1, t) = 1 via
    T(m, t+1, t) >= ceil(m/(m-t) * T(m-1, t+1, t)), all in integers.
    Chains are memoized per t because sweeps walk n upward.
    """
    _check_nt(n, t)
    chain = _SCHOENHEIM.setdefault(t, [1])
    while len(chain) <= n - t - 1:
        m = t + 1 + len(chain)
        chain.append(ceil_div(m * chain[-1], m - t))
    return chain[n - t - 1]


def decaen_lower(n: int, t: int) -> int:
    """De Caen: T(n,t+1,t) >= (1/t) * (n-t)/(n-t+1) * C(n,t), rounded up."""
    _check_nt(n, t)
    return ceil_q(Fraction((n - t) * binomial(n, t), t * (n - t + 1)))


@dataclass(frozen=True)
class DesignParams:
    """An (n, s, t) parameter triple with the derived code parameters.

    ``k = n - t - 1`` and ``d = t + 2`` describe the [n, k, d] MDS code whose
    minimum-weight parity checks have t zeros.
    """

    n: int
    t: int
    s: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.t < self.n:
            raise ValueError(f"need 0 <= t < n, got n={self.n} t={self.t}")
        if self.s is not None and not self.t <= self.s <= self.n:
            raise ValueError(f"need t <= s <= n, got s={self.s}")

    @property
    def k(self) -> int:
        return self.n - self.t - 1

    @property
    def d(self) -> int:
        return self.t + 2

    @property
    def dual_distance(self) -> int:
        return self.n - self.d + 2

    @classmethod
    def from_code(cls, n: int, d: int) -> "DesignParams":
        if not 2 <= d <= n:
            raise ValueError(f"need 2 <= d <= n, got n={n} d={d}")
        return cls(n, d - 2)


# ---------------------------------------------------------------- ExtReal


def opposite(mode: str) -> str:
    return _OPPOSITE[mode]


def context(mode: str, precision: int = PRECISION) -> gmpy2.context:
    """A gmpy2 context rounding toward ``mode`` ('up', 'down', 'nearest')."""
    try:
        rnd = _ROUND[mode]
    except KeyError:
        raise ValueError(f"unknown rounding mode {mode!r}") from None
    return gmpy2.context(precision=precision, round=rnd,
                         emin=gmpy2.get_emin_min(), emax=gmpy2.get_emax_max())


@contextmanager
def rounding(mode: str, precision: int = PRECISION) -> Iterator[None]:
    with context(mode, precision):
        yield


def ext(x, mode: str, precision: int = PRECISION) -> mpfr:
    """Convert an int / Fraction / float / mpq exactly-then-rounded to mpfr."""
    if isinstance(x, Fraction):
        x = mpq(x.numerator, x.denominator)
    elif isinstance(x, int):
        x = mpz(x)
    with context(mode, precision):
        return mpfr(x)


def ext_floor(x) -> int:
    return int(gmpy2.floor(x))


def ext_ceil(x) -> int:
    return int(gmpy2.ceil(x))


def pow_ratio(num: int, den: int, e: int, mode: str, precision: int = PRECISION) -> mpfr:
    """(num/den)**e for 0 <= num <= den and integer e >= 0, rounded toward ``mode``.

    Goes through exp(e * log(num/den)); every intermediate is rounded in the
    direction that keeps the final result on the requested side.
    """
    if e == 0 or num == den:
        return ext(1, mode, precision)
    if num == 0:
        return ext(0, mode, precision)
    inward = opposite(mode)
    with context(mode, precision):
        # log(ratio) <= 0; rounding it toward `mode` moves the result that way
        lg = gmpy2.log(mpfr(mpq(num, den)))
    # shrink |e| when rounding up, grow it when rounding down
    ee = ext(e, inward, precision)
    with context(mode, precision):
        return gmpy2.exp(ee * lg)
