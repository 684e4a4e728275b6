"""Interleaved test schedules with summable certified error bounds.

Given a family of tests indexed by nested alternatives, each carrying a
certified exponent and an onset sample size, the scheduler assigns one family
member to every sample size: family 1 runs first, later families take over at
block boundaries chosen so that every per-index error-bound sequence is
summable (the i-th family's block is long enough that its geometric bound tail
is below 1/i^2). Summability of the bounds is what turns per-test consistency
into almost-surely-finitely-many errors along a single growing sample path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError

__all__ = [
    "TestFamilyMember",
    "TestFamily",
    "TestSchedule",
    "UnionSchedule",
    "block_lengths",
    "interleave",
    "tail_constant",
    "tail_bound",
    "union_schedule",
]


def block_lengths(exponents: Sequence[float]) -> list[int]:
    """Minimal block lengths for a family of certified exponents.

    The first length is 1; for ``i >= 2`` the length is the smallest integer
    ``l`` with ``exp(-c_i l) / (1 - exp(-c_i)) <= 1 / i**2``, which caps the
    geometric tail of the i-th family's bound sequence by ``1 / i**2``.
    """
    cs = [float(c) for c in exponents]
    if len(cs) == 0:
        raise ValidationError("at least one exponent required")
    if any(not math.isfinite(c) or c <= 0.0 for c in cs):
        raise ValidationError("every exponent must be positive and finite")
    lengths = [1]
    for i, c in enumerate(cs[1:], start=2):
        target = (1.0 - math.exp(-c)) / (i * i)
        l = max(1, math.ceil(-math.log(target) / c))
        while l > 1 and math.exp(-c * (l - 1)) <= target:
            l -= 1
        while math.exp(-c * l) > target:
            l += 1
        lengths.append(l)
    return lengths


def tail_constant(c: float) -> float:
    """Geometric tail constant ``1 / (1 - exp(-c))`` for per-index bounds ``exp(-cn)``."""
    if c <= 0.0:
        raise ValidationError("exponent must be positive")
    return 1.0 / (1.0 - math.exp(-c))


def tail_bound(k: int, c: float, C: float) -> float:
    """Certified bound ``C * exp(-c k)`` on the probability of any error past index ``k``.

    The value may exceed 1 for small ``k`` (vacuous); reports clamp it to 1.
    """
    if c <= 0.0 or C <= 0.0:
        raise ValidationError("constants must be positive")
    if k < 0:
        raise ValidationError("k must be >= 0")
    return C * math.exp(-c * k)


@dataclass(frozen=True)
class TestFamilyMember:
    """One indexed test constructor with its certificate.

    ``build(n)`` returns the test used at sample size ``n``; the certificate
    states that both error probabilities are at most ``exp(-exponent * n)``
    for ``n > onset`` (the type II side against the alternatives this member
    covers).
    """

    build: Callable[[int], object]
    exponent: float
    onset: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.exponent) and self.exponent > 0.0):
            raise ValidationError("member exponent must be positive and finite")
        if self.onset < 1:
            raise ValidationError("member onset must be >= 1")


@dataclass(frozen=True)
class TestFamily:
    """Finite truncation of a countable family of certified tests.

    Member ``i`` (1-based) is assumed to cover the nested alternative union of
    pieces ``1..i``; reports state which pieces the truncation covers.
    """

    members: Tuple[TestFamilyMember, ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValidationError("a test family needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def exponents(self) -> list[float]:
        return [m.exponent for m in self.members]


@dataclass(frozen=True)
class ScheduleBlock:
    start: int
    end: Optional[int]  # inclusive; None = runs forever
    family_index: int  # 1-based
    exponent: float
    onset: int


class TestSchedule:
    """Assignment of one family member to every sample size.

    Blocks partition ``1..infinity``; the schedule is evaluated up to
    ``n_max`` but its certified tails are computed over the infinite
    continuation of the last block.
    """

    def __init__(self, family: TestFamily, blocks: Sequence[ScheduleBlock], n_max: int,
                 hypothesis_key: Optional[np.ndarray] = None):
        self.family = family
        self.blocks = tuple(blocks)
        self.n_max = int(n_max)
        self.hypothesis_key = hypothesis_key
        self._starts = np.array([b.start for b in self.blocks])

    # -- assignment -------------------------------------------------------------
    def _block_at(self, n: int) -> ScheduleBlock:
        if n < 1:
            raise ValidationError("sample index must be >= 1")
        idx = int(np.searchsorted(self._starts, n, side="right")) - 1
        return self.blocks[idx]

    def family_index_at(self, n: int) -> int:
        return self._block_at(n).family_index

    def test_at(self, n: int):
        block = self._block_at(n)
        return self.family.members[block.family_index - 1].build(n)

    @property
    def boundaries(self) -> list[int]:
        """Last sample size of each finite block."""
        return [b.end for b in self.blocks if b.end is not None]

    # -- certified bounds ---------------------------------------------------------
    def alpha_bound_at(self, n: int) -> float:
        """Per-index certified type I bound; 1.0 where no certificate applies."""
        block = self._block_at(n)
        if n > block.onset:
            return math.exp(-block.exponent * n)
        return 1.0

    def beta_bound_at(self, n: int, piece: Optional[int] = None) -> float:
        """Per-index certified type II bound for alternative piece ``piece``.

        Family ``i`` covers pieces ``1..i``; indices scheduled to a family that
        does not cover the piece carry no certificate (bound 1.0). ``piece``
        defaults to the full union, covered only by the last family.
        """
        if piece is None:
            piece = len(self.family)
        block = self._block_at(n)
        if block.family_index >= piece and n > block.onset:
            return math.exp(-block.exponent * n)
        return 1.0

    def _tail(self, k: int, covers: Callable[[ScheduleBlock], bool]) -> float:
        """Sum of per-index certified bounds over all ``n > k`` (to infinity)."""
        total = 0.0
        for block in self.blocks:
            lo = max(k + 1, block.start)
            hi = block.end  # None = infinite
            if hi is not None and lo > hi:
                continue
            if not covers(block):
                if hi is None:
                    return math.inf  # uncertified forever
                total += hi - lo + 1
                continue
            uncert_hi = min(block.onset, hi) if hi is not None else block.onset
            if lo <= uncert_hi:
                total += uncert_hi - lo + 1
            cert_lo = max(lo, block.onset + 1)
            c = block.exponent
            if hi is None:
                total += math.exp(-c * cert_lo) / (1.0 - math.exp(-c))
            elif cert_lo <= hi:
                span = hi - cert_lo + 1
                total += math.exp(-c * cert_lo) * (1.0 - math.exp(-c * span)) / (1.0 - math.exp(-c))
        return total

    def alpha_tail(self, k: int) -> float:
        """Certified bound on the probability of any false rejection past ``k``."""
        return self._tail(k, lambda block: True)

    def beta_tail(self, k: int, piece: int) -> float:
        """Certified bound on any false acceptance past ``k`` for one piece."""
        return self._tail(k, lambda block: block.family_index >= piece)

    def certified_tail(self, k: int) -> float:
        """Worst certified tail over the hypothesis side and every covered piece."""
        worst = self.alpha_tail(k)
        for piece in range(1, len(self.family) + 1):
            worst = max(worst, self.beta_tail(k, piece))
        return worst

    # -- serialization -------------------------------------------------------------
    def to_json_dict(self) -> dict:
        rows = []
        for block in self.blocks:
            start = block.start
            end = self.n_max if block.end is None else block.end
            rows.append(
                {
                    "start": start,
                    "end": end,
                    "family_index": block.family_index,
                    "exponent": block.exponent,
                    "bound_at_start": min(1.0, self.alpha_bound_at(start)),
                }
            )
        return {"n_max": self.n_max, "blocks": rows}


def interleave(family: TestFamily, n_max: int,
               hypothesis_key: Optional[np.ndarray] = None) -> TestSchedule:
    """Build the block schedule for a family of certified tests.

    Families are taken in index order; each boundary is the smallest admissible
    value: past the previous boundary, at least the family's block length, and
    past its onset. With a single member the schedule is that member at every
    sample size.
    """
    lengths = block_lengths(family.exponents)
    members = family.members
    count = len(members)
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")

    boundaries = []
    previous = lengths[0]  # first block runs through the first boundary
    for s in range(1, count):
        boundary = max(previous + 1, lengths[s], members[s].onset + 1)
        boundaries.append(boundary)
        previous = boundary
    if boundaries and n_max < boundaries[0]:
        raise ValidationError(
            f"n_max={n_max} is smaller than the first block boundary {boundaries[0]}"
        )

    blocks = []
    start = 1
    for s in range(count):
        end = boundaries[s] if s < count - 1 else None
        member = members[s]
        blocks.append(
            ScheduleBlock(
                start=start,
                end=end,
                family_index=s + 1,
                exponent=member.exponent,
                onset=member.onset,
            )
        )
        if end is not None:
            start = end + 1
    return TestSchedule(family, blocks, n_max, hypothesis_key=hypothesis_key)


class UnionSchedule:
    """Pointwise union of two schedules sharing a hypothesis set.

    Rejects at ``n`` when either constituent rejects; the certified type I
    bound adds, the type II bound is the worse of the two (each alternative
    member is covered by its own constituent).
    """

    def __init__(self, first, second):
        key1, key2 = first.hypothesis_key, second.hypothesis_key
        if key1 is None or key2 is None or not np.array_equal(key1, key2):
            raise ValidationError("union requires schedules with the same hypothesis set")
        self.first = first
        self.second = second
        self.hypothesis_key = key1
        self.n_max = min(first.n_max, second.n_max)

    def test_at(self, n: int):
        from .partition_tests import UnionTest

        return UnionTest([self.first.test_at(n), self.second.test_at(n)])

    def alpha_bound_at(self, n: int) -> float:
        return self.first.alpha_bound_at(n) + self.second.alpha_bound_at(n)

    def beta_bound_at(self, n: int, piece: Optional[int] = None) -> float:
        return max(self.first.beta_bound_at(n, piece), self.second.beta_bound_at(n, piece))

    def alpha_tail(self, k: int) -> float:
        return self.first.alpha_tail(k) + self.second.alpha_tail(k)


def union_schedule(first, second) -> UnionSchedule:
    """Combine schedules for two alternative sets into one for their union."""
    return UnionSchedule(first, second)
