"""Exact minimum SE, Turán and covering numbers by branch and bound.

Each problem is recast as set cover: targets are the subsets that must be
handled, candidates are the t-subsets, and the incidence of a candidate is
the bitmask of targets it handles.  Only tiny instances are in reach; the
solver refuses anything whose incidence table exceeds the budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .combinat import binomial
from .setsys import BudgetExceeded, SetSystem, is_se_system, is_turan_system, to_mask

# Candidate x target incidence bits allowed without an explicit override.
INCIDENCE_BUDGET = 10**6


@dataclass(frozen=True)
class CoverInstance:
    """Targets, candidate blocks and the targets each candidate handles.

    ``incidence[c]`` has bit u set iff candidate c handles target u.  Both
    lists are in lexicographic order of the underlying subsets.
    """

    n: int
    universe: tuple[int, ...]
    candidates: tuple[int, ...]
    incidence: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.universe) * len(self.candidates)


def _subsets(n: int, k: int) -> list[int]:
    return [to_mask(c) for c in itertools.combinations(range(1, n + 1), k)]


def build_instance(n: int, universe: Sequence[int], candidates: Sequence[int],
                   handles: Callable[[int, int], bool],
                   budget: int | None = INCIDENCE_BUDGET) -> CoverInstance:
    """Generic instance; ``handles(candidate, target)`` decides incidence."""
    if budget is not None and len(universe) * len(candidates) > budget:
        raise BudgetExceeded(
            f"{len(candidates)} candidates x {len(universe)} targets exceeds "
            f"the incidence budget {budget}")
    inc = []
    for c in candidates:
        bits = 0
        for u, x in enumerate(universe):
            if handles(c, x):
                bits |= 1 << u
        inc.append(bits)
    return CoverInstance(n, tuple(universe), tuple(candidates), tuple(inc))


def se_instance(n: int, t: int, budget: int | None = INCIDENCE_BUDGET) -> CoverInstance:
    if not 0 <= t < n:
        raise ValueError(f"need 0 <= t < n, got n={n} t={t}")
    _precheck(binomial(n, t) * sum(binomial(n, i) for i in range(1, t + 2)), budget)
    universe = [m for i in range(1, t + 2) for m in _subsets(n, i)]
    return build_instance(n, universe, _subsets(n, t),
                          lambda c, x: (x & ~c).bit_count() == 1, budget)


def turan_instance(n: int, s: int, t: int,
                   budget: int | None = INCIDENCE_BUDGET) -> CoverInstance:
    if not 0 <= t <= s <= n:
        raise ValueError(f"need 0 <= t <= s <= n, got n={n} s={s} t={t}")
    _precheck(binomial(n, t) * binomial(n, s), budget)
    return build_instance(n, _subsets(n, s), _subsets(n, t),
                          lambda c, x: c & ~x == 0, budget)


def _precheck(bits: int, budget: int | None) -> None:
    if budget is not None and bits > budget:
        raise BudgetExceeded(f"{bits} incidence bits exceeds the budget {budget}")


def greedy_cover(inst: CoverInstance) -> list[int]:
    """Largest gain first, lowest index on ties.  Used as the initial incumbent."""
    left = (1 << len(inst.universe)) - 1
    chosen: list[int] = []
    while left:
        gain, c = max(((inst.incidence[c] & left).bit_count(), -c)
                      for c in range(len(inst.candidates)))
        if gain == 0:
            raise ValueError("some target is handled by no candidate")
        chosen.append(-c)
        left &= ~inst.incidence[-c]
    return chosen


def solve_cover(inst: CoverInstance, fix_first: bool = False) -> list[int]:
    """Indices of a minimum cover.

    Depth-first search that branches on the uncovered target with the fewest
    available candidates (lowest index on ties), trying candidates by
    decreasing gain.  A branch is cut when the chosen count plus a lower
    bound reaches the incumbent.  The bound is the larger of
    ceil(uncovered / max gain) and the fractional bound sum_u 1/g(u), g(u)
    the largest gain among candidates handling u.

    ``fix_first`` puts candidate 0 in every solution.  That is only exact
    when a symmetry of the instance maps some optimal cover onto one
    containing candidate 0, as for the symmetric SE and Turán instances.
    """
    inc = inst.incidence
    ntarget = len(inst.universe)
    by_target = [[c for c, bits in enumerate(inc) if bits >> u & 1] for u in range(ntarget)]
    target_mask = [sum(1 << c for c in cs) for cs in by_target]
    if any(not cs for cs in by_target):
        raise ValueError("some target is handled by no candidate")

    best = greedy_cover(inst)
    everything = (1 << ntarget) - 1
    allowed0 = (1 << len(inc)) - 1

    def bound(left: int, allowed: int) -> int:
        gains: dict[int, int] = {}
        frac, top, count = 0.0, 0, 0
        x = left
        while x:
            low = x & -x
            u = low.bit_length() - 1
            x ^= low
            g = 0
            for c in by_target[u]:
                if allowed >> c & 1:
                    v = gains.get(c)
                    if v is None:
                        v = gains[c] = (inc[c] & left).bit_count()
                    if v > g:
                        g = v
            if g == 0:
                return len(inc) + 1
            frac += 1.0 / g
            top = max(top, g)
            count += 1
        # the float sum may sit a hair above an integer it equals exactly
        return max(math.ceil(frac - 1e-9), -(-count // top))

    def dfs(left: int, chosen: list[int], allowed: int) -> None:
        nonlocal best
        if not left:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        if len(chosen) + bound(left, allowed) >= len(best):
            return
        pick, fewest = -1, len(inc) + 1
        x = left
        while x:
            low = x & -x
            u = low.bit_length() - 1
            x ^= low
            k = (target_mask[u] & allowed).bit_count()
            if k < fewest:
                pick, fewest = u, k
                if k <= 1:
                    break
        if fewest == 0:
            return
        opts = [c for c in by_target[pick] if allowed >> c & 1]
        opts.sort(key=lambda c: (-(inc[c] & left).bit_count(), c))
        for c in opts:
            chosen.append(c)
            dfs(left & ~inc[c], chosen, allowed & ~(1 << c))
            chosen.pop()
            # later siblings never use c: those covers were already explored
            allowed &= ~(1 << c)

    if fix_first:
        dfs(everything & ~inc[0], [0], allowed0 & ~1)
    else:
        dfs(everything, [], allowed0)
    return sorted(best)


def min_se(n: int, t: int, budget: int | None = INCIDENCE_BUDGET) -> tuple[int, SetSystem]:
    """S(n, t) and a minimum SE system."""
    inst = se_instance(n, t, budget)
    if t == 0:
        # the empty block covers every singleton
        sys = SetSystem(n, 0, ((),), "se")
        return 1, sys
    picks = solve_cover(inst, fix_first=True)
    sys = SetSystem.from_masks(n, t, [inst.candidates[c] for c in picks], "se")
    if not is_se_system(sys):
        raise AssertionError(f"solver returned an invalid SE system for n={n} t={t}")
    return len(sys), sys


def min_turan(n: int, s: int, t: int,
              budget: int | None = INCIDENCE_BUDGET) -> tuple[int, SetSystem]:
    """T(n, s, t) and a minimum Turán system."""
    inst = turan_instance(n, s, t, budget)
    if t == 0:
        sys = SetSystem(n, 0, ((),), "turan", s)
        return 1, sys
    picks = solve_cover(inst, fix_first=True)
    sys = SetSystem.from_masks(n, t, [inst.candidates[c] for c in picks], "turan", s)
    if not is_turan_system(sys, s):
        raise AssertionError(f"solver returned an invalid Turán system for n={n} s={s} t={t}")
    return len(sys), sys


def min_covering(n: int, k: int, covered: int,
                 budget: int | None = INCIDENCE_BUDGET) -> tuple[int, SetSystem]:
    """C(n, k, covered) through its Turán complement."""
    value, tur = min_turan(n, n - covered, n - k, budget)
    full = (1 << n) - 1
    return value, SetSystem.from_masks(n, k, (full & ~m for m in tur.masks), "covering", covered)


def se3_matches_turan43(n: int) -> bool:
    """S(n, 3) == T(n, 4, 3), checked by solving both."""
    if n not in (6, 7, 8):
        raise ValueError(f"only n in 6..8 is in reach, got {n}")
    return min_se(n, 3)[0] == min_turan(n, 4, 3)[0]
