"""Explicit constructions of SE systems, Turán systems and covering designs.

Every builder returns a :class:`~singlex.setsys.SetSystem`; none of them
verifies its own output (the verifiers in :mod:`singlex.setsys` do that).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .combinat import binomial
from .setsys import DEFAULT_BUDGET, BudgetExceeded, SetSystem, mark_covered, to_mask


class BinStats(NamedTuple):
    weight: int
    empty: int
    full: int


@dataclass(frozen=True)
class PartitionScheme:
    """{1..n} split into l bins of consecutive elements, larger bins first."""

    n: int
    l: int
    bins: tuple[tuple[int, ...], ...]

    @property
    def bin_masks(self) -> tuple[int, ...]:
        return tuple(to_mask(b) for b in self.bins)

    def bin_of(self, e: int) -> int:
        for i, b in enumerate(self.bins):
            if e in b:
                return i
        raise ValueError(f"{e} not in 1..{self.n}")

    def stats(self, mask: int) -> BinStats:
        w = e = f = 0
        for i, bm in enumerate(self.bin_masks):
            c = (mask & bm).bit_count()
            w += i * c
            if c == 0:
                e += 1
            elif mask & bm == bm:
                f += 1
        return BinStats(w, e, f)


def partition_bins(n: int, l: int) -> PartitionScheme:
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got n={n} l={l}")
    q, r = divmod(n, l)
    bins, start = [], 1
    for i in range(l):
        size = q + (1 if i < r else 0)
        bins.append(tuple(range(start, start + size)))
        start += size
    return PartitionScheme(n, l, tuple(bins))


def _tsubsets(n: int, t: int):
    for c in itertools.combinations(range(1, n + 1), t):
        yield to_mask(c)


def construct_weighted_partition(n: int, t: int, l: int, j: int) -> SetSystem:
    """Z plus the weight class j mod l (Kim–Roush style SE system).

    Z holds the t-sets that miss some bin N_m while not containing all of
    N_{m-1} (bin indices mod l).
    """
    if not 0 < t < n - 2:
        raise ValueError(f"need 0 < t < n-2, got n={n} t={t}")
    if l * (n - t - 2) < n or l > n:
        raise ValueError(f"need n/(n-t-2) <= l <= n, got l={l}")
    if not 0 <= j < l:
        raise ValueError(f"need 0 <= j < l, got j={j}")
    ps = partition_bins(n, l)
    bm = ps.bin_masks
    blocks = []
    for x in _tsubsets(n, t):
        in_z = any(x & bm[m] == 0 and x & bm[m - 1] != bm[m - 1] for m in range(l))
        if in_z or ps.stats(x).weight % l == j:
            blocks.append(x)
    return SetSystem.from_masks(n, t, blocks, "se")


def weighted_partition_z(n: int, t: int, l: int) -> int:
    """|Z| for the weighted-partition construction."""
    bm = partition_bins(n, l).bin_masks
    return sum(1 for x in _tsubsets(n, t)
               if any(x & bm[m] == 0 and x & bm[m - 1] != bm[m - 1] for m in range(l)))


def patch_index_pairs(ps: PartitionScheme, t: int):
    """(I, i, j) with i != j in I and sum over I minus N_j <= t < sum over I.

    I only has to be minimal with respect to dropping the partially used
    bin j.  Requiring every proper subset of I to have sum <= t loses the
    blocks needed for unions of full bins (e.g. n=5, t=2, l=2, X={4,5}).
    Every such I still has |I| * ceil(n/l) >= t+1 and
    (|I|-1) * floor(n/l) < t+1, so |F| <= g(n, t, l) is unaffected.
    """
    sizes = [len(b) for b in ps.bins]
    lo, hi = min(sizes), max(sizes)
    for r in range(2, ps.l + 1):
        if r * hi < t + 1 or (r - 1) * lo > t:
            continue
        for idx in itertools.combinations(range(ps.l), r):
            total = sum(sizes[m] for m in idx)
            if total <= t:
                continue
            for j in idx:
                if total - sizes[j] <= t:
                    for i in idx:
                        if i != j:
                            yield idx, i, j


def bin_parity_f(n: int, t: int, l: int) -> set[int]:
    """The patch family F of the bin-parity construction, as masks."""
    ps = partition_bins(n, l)
    sizes = [len(b) for b in ps.bins]
    fam = set()
    for idx, i, j in patch_index_pairs(ps, t):
        total = sum(sizes[m] for m in idx)
        elems = [e for m in idx if m not in (i, j) for e in ps.bins[m]]
        elems += ps.bins[i][: sizes[i] - 1]
        elems += ps.bins[j][: t + 1 - (total - sizes[j])]
        fam.add(to_mask(elems))
    return fam


def construct_bin_parity(n: int, t: int, l: int, j: int) -> SetSystem:
    """Frankl–Rödl style SE system: F plus {X : (w(X)+j) mod l <= max(e(X), f(X))}."""
    if not 0 < t < n:
        raise ValueError(f"need 0 < t < n, got n={n} t={t}")
    if not 1 <= l <= n or not 0 <= j < l:
        raise ValueError(f"need 1 <= l <= n and 0 <= j < l, got l={l} j={j}")
    ps = partition_bins(n, l)
    blocks = bin_parity_f(n, t, l)
    for x in _tsubsets(n, t):
        st = ps.stats(x)
        if (st.weight + j) % l <= max(st.empty, st.full):
            blocks.add(x)
    return SetSystem.from_masks(n, t, blocks, "se")


def kuzjurin_residue_sizes(n: int, k: int) -> list[int]:
    """|Q_i| for each residue i of the element sum mod n."""
    counts = [0] * n
    for c in itertools.combinations(range(1, n + 1), k):
        counts[sum(c) % n] += 1
    return counts


def construct_kuzjurin(n: int, k: int) -> SetSystem:
    """An (n, k, k-1) covering design from the sum-mod-n class Q_i plus patches.

    Blocks of Q_i pairwise share at most k-2 elements, so the class with the
    most blocks leaves the fewest (k-1)-sets uncovered; each of those gets
    the completion X + {smallest element not in X}.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n} k={k}")
    counts = kuzjurin_residue_sizes(n, k)
    best = max(range(n), key=lambda i: (counts[i], -i))
    q = [c for c in itertools.combinations(range(1, n + 1), k) if sum(c) % n == best]
    shadow = {to_mask(c[:p] + c[p + 1:]) for c in q for p in range(k)}
    blocks = {to_mask(c) for c in q}
    full = (1 << n) - 1
    for x in _tsubsets(n, k - 1):
        if x not in shadow:
            free = full & ~x
            blocks.add(x | (free & -free))
    return SetSystem.from_masks(n, k, blocks, "covering", k - 1)


def construct_recurrent_se(n: int, t: int) -> SetSystem:
    """Unroll S(n,t) <= S(n-1,t-1) + T(n-1,t+1,t) down to S(n-t, 0) = 1.

    At ground size m the distinguished element is m itself; the Turán part on
    {1..m-1} is the complement of the Kuzjurin (m-1, k, k-1) design, with
    k = n - t - 1 fixed throughout.
    """
    if not 0 < t < n - 1:
        raise ValueError(f"need 0 < t < n-1, got n={n} t={t}")
    k = n - t - 1
    masks = [0]
    for m in range(k + 2, n + 1):
        top = 1 << (m - 1)
        ground = top - 1
        cover = construct_kuzjurin(m - 1, k)
        masks = [b | top for b in masks] + [ground & ~c for c in cover.masks]
    return SetSystem.from_masks(n, t, masks, "se")


def _first_covering_tset(n: int, t: int, x: tuple[int, ...]) -> int:
    fill = [e for e in range(1, n + 1) if e not in x][: t - len(x) + 1]
    return min(tuple(sorted(x[:p] + x[p + 1:] + tuple(fill))) for p in range(len(x)))


def construct_random_greedy(n: int, t: int, p: float, seed: int,
                            budget: int = DEFAULT_BUDGET) -> SetSystem:
    """Random SE system: keep each t-set with probability p, then patch greedily.

    Phase 1 draws one uniform per t-subset (lexicographic order) from
    ``numpy.random.Generator(PCG64(seed))``.  Phase 2 walks the 1..t+1
    subsets in size-then-lexicographic order and adds the lexicographically
    first t-set covering each one still uncovered.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0 <= t < n:
        raise ValueError(f"need 0 <= t < n, got n={n} t={t}")
    work = binomial(n, t) + sum(binomial(n, i) for i in range(1, t + 2))
    if work > budget or n > 24:
        raise BudgetExceeded(f"random greedy on n={n}, t={t} exceeds budget")
    rng = np.random.Generator(np.random.PCG64(seed))
    cands = list(_tsubsets(n, t))
    keep = rng.random(len(cands)) < p
    chosen = [c for c, k in zip(cands, keep) if k]
    covered = np.zeros(1 << n, dtype=bool)
    for c in chosen:
        mark_covered(covered, n, c)
    for i in range(1, t + 2):
        for x in itertools.combinations(range(1, n + 1), i):
            if covered[to_mask(x)]:
                continue
            b = to_mask(_first_covering_tset(n, t, x))
            chosen.append(b)
            mark_covered(covered, n, b)
    return SetSystem.from_masks(n, t, chosen, "se")
