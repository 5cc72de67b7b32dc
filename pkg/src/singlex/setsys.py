"""Blocks, set systems, exhaustive verifiers and the block-file format.

A block is a sorted tuple of 1-based elements of {1..n}.  Internally the
verifiers work on bitmasks (bit ``e-1`` set for element ``e``) and, for
small ground sets, on a dense boolean table indexed by mask.

Witnesses are the first failing subset in *size-then-lexicographic*
order: all 1-subsets, then all 2-subsets, and so on, each size in the
order produced by :func:`itertools.combinations`.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .combinat import binomial

Block = tuple[int, ...]

DEFAULT_BUDGET = 10**8
# Largest n for which the dense 2**n table is used.
DENSE_MAX_N = 24

KINDS = ("se", "co_se", "turan", "covering", "plain")
_DUAL_KIND = {"se": "co_se", "co_se": "se", "turan": "covering", "covering": "turan", "plain": "plain"}


class BudgetExceeded(RuntimeError):
    """Raised instead of silently starting an enumeration that is too large."""


class BlockFileError(ValueError):
    pass


class Check(NamedTuple):
    ok: bool
    witness: Block | None

    def __bool__(self) -> bool:
        return self.ok


def to_mask(block: Iterable[int]) -> int:
    m = 0
    for e in block:
        m |= 1 << (e - 1)
    return m


def to_block(mask: int) -> Block:
    out = []
    e = 1
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return tuple(out)


def covers(a: Iterable[int], x: Iterable[int]) -> bool:
    """True iff exactly one element of ``x`` lies outside ``a``."""
    return len(set(x) - set(a)) == 1


@dataclass(frozen=True)
class SetSystem:
    """A family of distinct t-subsets of {1..n}.

    ``kind`` records what the family is meant to be; ``target`` is the size
    of the subsets the family must handle (s for a Turán system, the covered
    size for a covering design, unused for SE systems).  Blocks are stored
    canonically: members ascending, blocks sorted.
    """

    n: int
    t: int
    blocks: tuple[Block, ...] = ()
    kind: str = "se"
    target: int | None = None
    _masks: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not 0 <= self.t <= self.n:
            raise ValueError(f"block size {self.t} out of range for n={self.n}")
        canon = []
        for b in self.blocks:
            bb = tuple(sorted(b))
            if len(bb) != self.t or len(set(bb)) != self.t:
                raise ValueError(f"block {b} does not have {self.t} distinct members")
            if bb and (bb[0] < 1 or bb[-1] > self.n):
                raise ValueError(f"block {b} has an element outside 1..{self.n}")
            canon.append(bb)
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValueError(f"duplicate block {a}")
        object.__setattr__(self, "blocks", tuple(canon))
        object.__setattr__(self, "_masks", tuple(to_mask(b) for b in canon))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def masks(self) -> tuple[int, ...]:
        return self._masks

    @classmethod
    def from_masks(cls, n: int, t: int, masks: Iterable[int], kind: str = "se",
                   target: int | None = None) -> "SetSystem":
        return cls(n, t, tuple(to_block(m) for m in set(masks)), kind, target)


# ------------------------------------------------------------ dense tables


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int8)
    for j in range(n):
        pc[1 << j: 2 << j] = pc[: 1 << j] + 1
    return pc


def submasks(mask: int) -> np.ndarray:
    """All submasks of ``mask`` as an int64 array (including 0)."""
    bits = [1 << j for j in range(mask.bit_length()) if mask >> j & 1]
    out = np.zeros(1, dtype=np.int64)
    for b in bits:
        out = np.concatenate([out, out | b])
    return out


def mark_covered(covered: np.ndarray, n: int, mask: int) -> None:
    """Set every X with |X minus block| == 1 in the dense table ``covered``."""
    subs = submasks(mask)
    outside = [1 << j for j in range(n) if not mask >> j & 1]
    if outside:
        covered[(subs[:, None] | np.asarray(outside, dtype=np.int64)[None, :]).ravel()] = True


def _first_false(ok: np.ndarray, pc: np.ndarray, sizes: Sequence[int]) -> Block | None:
    for size in sizes:
        bad = np.flatnonzero(~ok & (pc == size))
        if bad.size:
            return min(to_block(int(m)) for m in bad)
    return None


def _guard(count: int, budget: int | None) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    if count > budget:
        raise BudgetExceeded(f"{count} subsets to check exceeds budget {budget}")


# -------------------------------------------------------------- verifiers


def is_se_system(sys: SetSystem, budget: int | None = None) -> Check:
    """Every i-subset, i = 1..t+1, must be covered by some block."""
    n, t = sys.n, sys.t
    if t >= n:
        raise ValueError("an SE system needs t < n")
    _guard(sum(binomial(n, i) for i in range(1, t + 2)), budget)
    if n <= DENSE_MAX_N:
        covered = np.zeros(1 << n, dtype=bool)
        for m in sys.masks:
            mark_covered(covered, n, m)
        return _verdict(covered, _popcounts(n), range(1, t + 2))
    masks = sys.masks
    for i in range(1, t + 2):
        for x in itertools.combinations(range(1, n + 1), i):
            xm = to_mask(x)
            if not any((xm & ~b).bit_count() == 1 for b in masks):
                return Check(False, x)
    return Check(True, None)


def is_turan_system(sys: SetSystem, s: int, budget: int | None = None) -> Check:
    """Every s-subset must contain some block."""
    n, t = sys.n, sys.t
    if not t <= s <= n:
        raise ValueError(f"need t <= s <= n, got t={t} s={s} n={n}")
    _guard(binomial(n, s), budget)
    if n <= DENSE_MAX_N:
        up = np.zeros(1 << n, dtype=bool)
        up[list(sys.masks)] = True
        for j in range(n):
            v = up.reshape(-1, 2, 1 << j)
            v[:, 1, :] |= v[:, 0, :]
        return _verdict(up, _popcounts(n), (s,))
    masks = sys.masks
    for x in itertools.combinations(range(1, n + 1), s):
        xm = to_mask(x)
        if not any(b & ~xm == 0 for b in masks):
            return Check(False, x)
    return Check(True, None)


def is_covering_design(sys: SetSystem, covered: int, budget: int | None = None) -> Check:
    """Every ``covered``-subset must lie inside some block (blocks have size sys.t)."""
    n, s = sys.n, sys.t
    if not 0 <= covered <= s:
        raise ValueError(f"need 0 <= covered <= block size, got {covered} > {s}")
    _guard(binomial(n, covered), budget)
    if n <= DENSE_MAX_N:
        down = np.zeros(1 << n, dtype=bool)
        down[list(sys.masks)] = True
        for j in range(n):
            v = down.reshape(-1, 2, 1 << j)
            v[:, 0, :] |= v[:, 1, :]
        return _verdict(down, _popcounts(n), (covered,))
    masks = sys.masks
    for x in itertools.combinations(range(1, n + 1), covered):
        xm = to_mask(x)
        if not any(xm & ~b == 0 for b in masks):
            return Check(False, x)
    return Check(True, None)


def _verdict(ok: np.ndarray, pc: np.ndarray, sizes: Sequence[int]) -> Check:
    w = _first_false(ok, pc, sizes)
    return Check(w is None, w)


def verify(sys: SetSystem, budget: int | None = None) -> Check:
    """Dispatch on ``sys.kind``."""
    if sys.kind == "se":
        return is_se_system(sys, budget)
    if sys.kind == "turan":
        return is_turan_system(sys, sys.target if sys.target is not None else sys.t + 1, budget)
    if sys.kind == "covering":
        return is_covering_design(sys, sys.target if sys.target is not None else sys.t - 1, budget)
    if sys.kind == "co_se":
        return is_se_system(complement_system(sys), budget)
    raise ValueError(f"nothing to verify for kind {sys.kind!r}")


def complement_system(sys: SetSystem, verify_duality: bool = False) -> SetSystem:
    """Replace every block by its complement in {1..n}.

    A Turán (n, s, t) system becomes an (n, n-t, n-s) covering design and
    back, since T(n,s,t) = C(n, n-t, n-s).
    """
    full = (1 << sys.n) - 1
    target = None if sys.target is None else sys.n - sys.target
    out = SetSystem.from_masks(sys.n, sys.n - sys.t, (full & ~m for m in sys.masks),
                               _DUAL_KIND[sys.kind], target)
    if verify_duality and sys.kind in ("turan", "covering"):
        if bool(verify(sys)) != bool(verify(out)):
            raise AssertionError("complementation changed the verdict")
    return out


# ---------------------------------------------------------------- file I/O


def write_blocks(sys: SetSystem, path: str | os.PathLike) -> None:
    lines = [f"{sys.n} {sys.t} {len(sys.blocks)}"]
    lines += [" ".join(map(str, b)) for b in sys.blocks]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_blocks(text: str, kind: str = "se", target: int | None = None) -> SetSystem:
    header = None
    blocks: list[Block] = []
    seen: dict[Block, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            nums = [int(x) for x in line.split()]
        except ValueError:
            raise BlockFileError(f"line {lineno}: non-integer token") from None
        if header is None:
            if len(nums) != 3 or nums[0] < 1 or not 0 <= nums[1] <= nums[0] or nums[2] < 0:
                raise BlockFileError(f"line {lineno}: malformed header, expected 'n t m'")
            header = nums
            continue
        n, t, _ = header
        if len(nums) != t:
            raise BlockFileError(f"line {lineno}: expected {t} indices, got {len(nums)}")
        if any(not 1 <= e <= n for e in nums):
            raise BlockFileError(f"line {lineno}: index out of range 1..{n}")
        b = tuple(sorted(nums))
        if len(set(b)) != t:
            raise BlockFileError(f"line {lineno}: repeated index within block")
        if b in seen:
            raise BlockFileError(f"line {lineno}: duplicate block (first on line {seen[b]})")
        seen[b] = lineno
        blocks.append(b)
    if header is None:
        raise BlockFileError("line 1: missing header")
    if header[1] == 0 and header[2] == 1 and not blocks:
        # the lone empty block is written as a blank line
        blocks.append(())
    if len(blocks) != header[2]:
        raise BlockFileError(f"block count mismatch: header says {header[2]}, found {len(blocks)}")
    return SetSystem(header[0], header[1], tuple(blocks), kind, target)


def read_blocks(path: str | os.PathLike, kind: str = "se", target: int | None = None) -> SetSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_blocks(fh.read(), kind, target)
