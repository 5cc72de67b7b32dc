"""Reed-Solomon parity-check matrices built from SE systems, stopping sets and peeling.

Codes are [n, k, d] Reed-Solomon codes over a prime field GF(q), with
evaluation points 0, 1, ..., n-1 and k = n - d + 1.  Positions are 1-based
throughout, as are blocks in :mod:`singlex.setsys`.

A stopping set is a nonempty set S of positions such that no row of H has
exactly one nonzero entry inside S.  Peeling erasure decoding gets stuck
exactly on the largest stopping set inside the erased positions.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import gmpy2

from .combinat import binomial, ceil_div
from .exact import build_instance, solve_cover
from .setsys import Block, BudgetExceeded, SetSystem, is_se_system, to_block, to_mask

# Subsets examined by a stopping-distance search before it refuses.
STOPPING_BUDGET = 10**7
# exact_rho is only attempted up to this length.
RHO_MAX_N = 7


class MatrixFileError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self) -> None:
        if self.q < 2 or not gmpy2.is_prime(self.q):
            raise ValueError(f"{self.q} is not prime")

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, -1, self.q)

    @classmethod
    def at_least(cls, n: int) -> "PrimeField":
        """The smallest prime field with at least n elements."""
        return cls(int(gmpy2.next_prime(max(n, 2) - 1)))


@dataclass(frozen=True)
class CodeSpec:
    n: int
    d: int
    q: int
    alphas: tuple[int, ...]

    def __post_init__(self) -> None:
        PrimeField(self.q)
        if not 2 <= self.d <= self.n:
            raise ValueError(f"need 2 <= d <= n, got n={self.n} d={self.d}")
        if len(self.alphas) != self.n or len({a % self.q for a in self.alphas}) != self.n:
            raise ValueError("need n distinct evaluation points")

    @classmethod
    def rs(cls, n: int, d: int, q: int | None = None) -> "CodeSpec":
        """Evaluation points 0..n-1; q defaults to the smallest prime >= n."""
        q = PrimeField.at_least(n).q if q is None else q
        if q < n:
            raise ValueError(f"need q >= n, got q={q} n={n}")
        return cls(n, d, q, tuple(range(n)))

    @property
    def k(self) -> int:
        return self.n - self.d + 1

    @property
    def dual_distance(self) -> int:
        return self.n - self.d + 2

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @cached_property
    def multipliers(self) -> tuple[int, ...]:
        """v_j = prod_{i != j} (alpha_j - alpha_i)^-1, the dual column multipliers."""
        q, a = self.q, self.alphas
        out = []
        for j in range(self.n):
            prod = 1
            for i in range(self.n):
                if i != j:
                    prod = prod * (a[j] - a[i]) % q
            out.append(pow(prod, -1, q))
        return tuple(out)

    def generator_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Row m evaluates x^m at every point, m = 0..k-1."""
        return tuple(tuple(pow(a, m, self.q) for a in self.alphas) for m in range(self.k))


@dataclass(frozen=True)
class ParityCheckMatrix:
    q: int
    n: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        for r in rows:
            if len(r) != self.n:
                raise ValueError(f"row of length {len(r)}, expected {self.n}")
            if any(not 0 <= x < self.q for x in r):
                raise ValueError(f"entry outside [0, {self.q})")
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    @cached_property
    def supports(self) -> tuple[int, ...]:
        """Row supports as bitmasks (bit j-1 for position j)."""
        return tuple(sum(1 << j for j, x in enumerate(r) if x) for r in self.rows)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(s.bit_count() for s in self.supports)

    @cached_property
    def rank(self) -> int:
        return rank_mod(self.rows, self.q)

    @cached_property
    def stopping_distance(self) -> int | None:
        return stopping_distance(self)


def rank_mod(rows: Sequence[Sequence[int]], q: int) -> int:
    """Rank over GF(q) by Gaussian elimination."""
    m = [list(r) for r in rows]
    rank, ncol = 0, len(m[0]) if m else 0
    for col in range(ncol):
        piv = next((r for r in range(rank, len(m)) if m[r][col] % q), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, q)
        m[rank] = [x * inv % q for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] % q:
                f = m[r][col]
                m[r] = [(x - f * y) % q for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def is_dual(spec: CodeSpec, h: ParityCheckMatrix) -> bool:
    """Every row of h is orthogonal to every row of the generator matrix."""
    g = spec.generator_matrix()
    return all(sum(a * b for a, b in zip(row, grow)) % spec.q == 0
               for row in h.rows for grow in g)


def dual_vanishing_codeword(spec: CodeSpec, b: Block) -> tuple[int, ...]:
    """The dual codeword v_j g(alpha_j), g vanishing exactly on the points of b.

    Its zero set is exactly b, so its weight is n - d + 2.
    """
    if len(b) != spec.d - 2 or len(set(b)) != len(b):
        raise ValueError(f"need {spec.d - 2} distinct positions, got {b}")
    if any(not 1 <= j <= spec.n for j in b):
        raise ValueError(f"position out of range in {b}")
    return _codeword_with_zeros(spec, b, ())


def _codeword_with_zeros(spec: CodeSpec, zeros: Iterable[int], extra: Sequence[int]) -> tuple[int, ...]:
    """v_j f(alpha_j), f the product of (x - alpha_beta) over ``zeros`` and a monic factor.

    ``extra`` holds the low coefficients of that monic factor.
    """
    q, a = spec.q, spec.alphas
    roots = [a[j - 1] for j in zeros]
    out = []
    for j in range(spec.n):
        x = a[j]
        val = 1
        for r in roots:
            val = val * (x - r) % q
        val = val * _poly_eval(extra, x, q) % q
        out.append(val * spec.multipliers[j] % q)
    return tuple(out)


def _poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    """Monic polynomial x^m + c_{m-1} x^{m-1} + ... + c_0, coefficients low first."""
    acc = 1
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def codeword_with_support(spec: CodeSpec, support: Block) -> tuple[int, ...]:
    """A dual codeword whose support is exactly ``support``.

    The zero positions fix part of the polynomial; the remaining monic
    factor is searched by degree, then lexicographically by coefficients,
    until it has no root at a support point.  One exists for every support of size
    at least n - d + 2, since the dual code is MDS.
    """
    zeros = tuple(j for j in range(1, spec.n + 1) if j not in set(support))
    free = spec.d - 2 - len(zeros)
    if free < 0:
        raise ValueError(f"support of size {len(support)} is below the dual distance")
    pts = [spec.alphas[j - 1] for j in support]
    for deg in range(free + 1):
        for coeffs in itertools.product(range(spec.q), repeat=deg):
            if all(_poly_eval(coeffs, x, spec.q) for x in pts):
                return _codeword_with_zeros(spec, zeros, coeffs)
    raise ValueError(f"no dual codeword has support {support}")


def build_h_from_se(spec: CodeSpec, sys: SetSystem) -> ParityCheckMatrix:
    """One row per block: the dual codeword vanishing exactly on that block."""
    if sys.n != spec.n or sys.t != spec.d - 2:
        raise ValueError(f"need an (n, d-2) = ({spec.n}, {spec.d - 2}) SE system, "
                         f"got ({sys.n}, {sys.t})")
    check = is_se_system(sys)
    if not check:
        raise ValueError(f"not an SE system: {check.witness} is not covered")
    h = ParityCheckMatrix(spec.q, spec.n,
                          tuple(dual_vanishing_codeword(spec, b) for b in sys.blocks))
    if h.rank != spec.n - spec.k:
        raise AssertionError(f"rank {h.rank}, expected {spec.n - spec.k}")
    return h


def _subset_mask(h: ParityCheckMatrix, subset: Iterable[int]) -> int:
    s = tuple(subset)
    if not s:
        raise ValueError("a stopping set is nonempty")
    if any(not 1 <= j <= h.n for j in s):
        raise ValueError(f"position out of range in {s}")
    return to_mask(s)


def _stops(supports: Sequence[int], mask: int) -> bool:
    return all((r & mask).bit_count() != 1 for r in supports)


def is_stopping_set(h: ParityCheckMatrix, subset: Iterable[int]) -> bool:
    return _stops(h.supports, _subset_mask(h, subset))


def stopping_distance(h: ParityCheckMatrix, max_size: int | None = None,
                      budget: int = STOPPING_BUDGET) -> int | None:
    """Size of a smallest stopping set, searched by increasing size.

    Returns None if there is none of size <= ``max_size`` (default n).
    """
    top = h.n if max_size is None else min(max_size, h.n)
    if sum(binomial(h.n, s) for s in range(1, top + 1)) > budget:
        raise BudgetExceeded(f"stopping-set search up to size {top} on n={h.n} exceeds budget")
    sup = h.supports
    for size in range(1, top + 1):
        for c in itertools.combinations(range(h.n), size):
            if _stops(sup, sum(1 << j for j in c)):
                return size
    return None


class PeelResult(NamedTuple):
    recovered: bool
    residual: frozenset  # positions still erased; empty when recovered


def peel_decode(h: ParityCheckMatrix, erased: Iterable[int]) -> PeelResult:
    """Resolve erased positions one check at a time until none has a single erasure."""
    left = to_mask(erased)
    sup = h.supports
    progress = True
    while left and progress:
        progress = False
        for r in sup:
            hit = r & left
            if hit and hit & (hit - 1) == 0:
                left &= ~hit
                progress = True
    return PeelResult(left == 0, frozenset(to_block(left)))


def replacement_cap(spec: CodeSpec) -> int:
    return ceil_div(spec.n, spec.dual_distance)


def replace_nonmin_rows(spec: CodeSpec, h: ParityCheckMatrix) -> ParityCheckMatrix:
    """Swap every heavier row for minimum-weight rows whose supports union to its support.

    Each step takes the zero block b (lexicographically first on ties)
    whose vanishing codeword covers the most still-uncovered positions of
    the row's support T; b always contains the zeros of the row, so the new
    support lies inside T.  Zero rows are dropped.  Rows already of
    minimum weight stay where they are, and replacements take the place of
    the row they replace.
    """
    if h.n != spec.n or h.q != spec.q:
        raise ValueError("matrix does not match the code")
    m = spec.dual_distance
    full = (1 << spec.n) - 1
    cap = replacement_cap(spec)
    out: list[tuple[int, ...]] = []
    for row, t in zip(h.rows, h.supports):
        w = t.bit_count()
        if w == 0:
            continue
        if w < m:
            raise ValueError(f"row of weight {w} is below the dual distance {m}")
        if w == m:
            out.append(row)
            continue
        fixed = to_block(full & ~t)
        others = [j for j in range(1, spec.n + 1) if t >> (j - 1) & 1]
        options = sorted(tuple(sorted(fixed + extra))
                         for extra in itertools.combinations(others, spec.d - 2 - len(fixed)))
        covered, new = 0, []
        while covered != t:
            best = max(options, key=lambda b: (((full & ~to_mask(b)) & ~covered).bit_count(),
                                               [-x for x in b]))
            gain = (full & ~to_mask(best)) & ~covered
            if not gain:
                raise ValueError("support cannot be covered; is the code MDS?")
            covered |= full & ~to_mask(best)
            new.append(dual_vanishing_codeword(spec, best))
        if len(new) > cap:
            raise AssertionError(f"{len(new)} replacement rows exceed the cap {cap}")
        out.extend(new)
    res = ParityCheckMatrix(spec.q, spec.n, tuple(out))
    # the old row is a combination of its replacements, so rank cannot drop;
    # for a full parity-check matrix it cannot grow past n - k either
    if res.rank < h.rank:
        raise AssertionError("row replacement lowered the rank")
    return res


def dual_codewords(spec: CodeSpec) -> list[tuple[int, ...]]:
    """Every nonzero dual codeword, from all polynomials of degree < n - k."""
    q, n, r = spec.q, spec.n, spec.n - spec.k
    pw = [[pow(a, e, q) for e in range(r)] for a in spec.alphas]
    out = []
    for coeffs in itertools.product(range(q), repeat=r):
        if any(coeffs):
            out.append(tuple(sum(c * p for c, p in zip(coeffs, pw[j])) * spec.multipliers[j] % q
                             for j in range(n)))
    return out


def min_distance(spec: CodeSpec) -> int:
    """Minimum weight over the nonzero codewords of the code itself, by enumeration."""
    g = spec.generator_matrix()
    best = spec.n
    for coeffs in itertools.product(range(spec.q), repeat=spec.k):
        if any(coeffs):
            word = [sum(c * row[j] for c, row in zip(coeffs, g)) % spec.q for j in range(spec.n)]
            best = min(best, sum(1 for x in word if x))
    return best


def exact_rho(spec: CodeSpec) -> tuple[int, ParityCheckMatrix]:
    """Stopping redundancy: fewest dual-codeword rows with stopping distance d.

    Any such matrix already has rank n - k (a larger null space would hold
    a word of weight < d, whose support is a stopping set), so this is a set
    cover: every set of 1..d-1 positions must meet some row support exactly
    once.  Supports range over all sets of size >= n - d + 2, each of which
    carries a dual codeword because the dual code is MDS.
    """
    if spec.n > RHO_MAX_N:
        raise BudgetExceeded(f"exact stopping redundancy is limited to n <= {RHO_MAX_N}")
    n = spec.n
    universe = [to_mask(c) for s in range(1, spec.d)
                for c in itertools.combinations(range(1, n + 1), s)]
    cands = [to_mask(c) for w in range(spec.dual_distance, n + 1)
             for c in itertools.combinations(range(1, n + 1), w)]
    inst = build_instance(n, universe, cands, lambda c, x: (c & x).bit_count() == 1, None)
    picks = solve_cover(inst)
    rows = tuple(codeword_with_support(spec, to_block(cands[i])) for i in picks)
    h = ParityCheckMatrix(spec.q, n, rows)
    if h.stopping_distance != spec.d or h.rank != n - spec.k:
        raise AssertionError("exact_rho produced an invalid matrix")
    return len(h), h


# ---------------------------------------------------------------- file I/O


def write_matrix(h: ParityCheckMatrix, path: str | os.PathLike) -> None:
    lines = [f"{h.q} {len(h.rows)} {h.n}"] + [" ".join(map(str, r)) for r in h.rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_matrix(text: str) -> ParityCheckMatrix:
    lines = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), 1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MatrixFileError("line 1: missing header")
    lineno, head = lines[0]
    try:
        q, l, n = (int(x) for x in head)
    except ValueError:
        raise MatrixFileError(f"line {lineno}: malformed header, expected 'q l n'") from None
    if not gmpy2.is_prime(q):
        raise MatrixFileError(f"line {lineno}: q={q} is not prime")
    rows = []
    for lineno, toks in lines[1:]:
        try:
            row = [int(x) for x in toks]
        except ValueError:
            raise MatrixFileError(f"line {lineno}: non-integer token") from None
        if len(row) != n:
            raise MatrixFileError(f"line {lineno}: expected {n} entries, got {len(row)}")
        if any(not 0 <= x < q for x in row):
            raise MatrixFileError(f"line {lineno}: entry outside [0, {q})")
        rows.append(tuple(row))
    if len(rows) != l:
        raise MatrixFileError(f"row count mismatch: header says {l}, found {len(rows)}")
    return ParityCheckMatrix(q, n, tuple(rows))


def read_matrix(path: str | os.PathLike) -> ParityCheckMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())
