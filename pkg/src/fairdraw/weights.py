"""Weighted eligible lists: map probability distributions to an integer index space.

A candidate with weight w occupies a contiguous block of w indices (candidates
sorted lexicographically), so drawing a uniform index in [0, sum of weights)
selects each candidate with probability weight / index_space without ever
materializing the repeated-identifier list.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .errors import SpecError

LCM_CAP = 2**32
MAX_DECIMAL_DIGITS = 9


@dataclass(frozen=True, order=True)
class CandidateId:
    """Unambiguous candidate identifier (functional id, fingerprint, ...)."""

    identifier: str

    def __post_init__(self):
        if not self.identifier:
            raise SpecError("candidate identifier must be non-empty")


@dataclass(frozen=True)
class WeightedEligibleList:
    """Candidates with positive integer weights, in canonical sorted order."""

    entries: tuple[tuple[CandidateId, int], ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise SpecError("eligible list must be non-empty")
        ids = [c.identifier for c, _ in entries]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise SpecError(f"duplicate candidate {dup!r}")
        if ids != sorted(ids):
            raise SpecError("candidates must be sorted lexicographically")
        for c, w in entries:
            if w < 1:
                raise SpecError(f"candidate {c.identifier!r} has non-positive weight {w}")
        object.__setattr__(self, "entries", entries)
        cumulative = []
        total = 0
        for _, w in entries:
            total += w
            cumulative.append(total)
        object.__setattr__(self, "_cumulative", tuple(cumulative))

    @property
    def index_space(self) -> int:
        return self._cumulative[-1]

    def candidates(self) -> tuple[CandidateId, ...]:
        return tuple(c for c, _ in self.entries)


def uniform_list(candidates: list[CandidateId]) -> WeightedEligibleList:
    """All-distinct candidates, weight 1 each."""
    if not candidates:
        raise SpecError("candidate list must be non-empty")
    ids = [c.identifier for c in candidates]
    for i in ids:
        if ids.count(i) > 1:
            raise SpecError(f"duplicate candidate {i!r}")
    ordered = tuple((c, 1) for c in sorted(candidates))
    return WeightedEligibleList(ordered)


def from_fractions(weights: list[tuple[CandidateId, Fraction]]) -> WeightedEligibleList:
    """Exact-fraction probabilities; index space is the LCM of denominators."""
    if not weights:
        raise SpecError("weight list must be non-empty")
    fractions = [Fraction(f) for _, f in weights]
    total = sum(fractions)
    if total != 1:
        raise SpecError(f"probabilities must sum to 1, got {total}")
    scale = math.lcm(*(f.denominator for f in fractions))
    if scale > LCM_CAP:
        raise SpecError(
            f"denominator LCM {scale} exceeds {LCM_CAP}; rescale the probabilities "
            "or use a decimal scale"
        )
    ordered = sorted(((c, Fraction(f)) for c, f in weights), key=lambda p: p[0])
    entries = tuple((c, int(f * scale)) for c, f in ordered)
    return WeightedEligibleList(entries)


def from_decimal(weights: list[tuple[CandidateId, Decimal | str]]) -> WeightedEligibleList:
    """Decimal probabilities at a common power-of-ten scale (at most 10^9)."""
    if not weights:
        raise SpecError("weight list must be non-empty")
    try:
        decimals = [(c, Decimal(d)) for c, d in weights]
    except InvalidOperation as exc:
        raise SpecError(f"invalid decimal weight: {exc}") from exc
    k = max(max(-d.as_tuple().exponent, 0) for _, d in decimals)
    if k > MAX_DECIMAL_DIGITS:
        raise SpecError(f"decimal scale 10^{k} exceeds the 10^{MAX_DECIMAL_DIGITS} guard")
    total = sum(d for _, d in decimals)
    if total != 1:
        raise SpecError(f"probabilities must sum to 1, got {total}")
    scale = 10**k
    entries = tuple(
        (c, int(d.scaleb(k))) for c, d in sorted(decimals, key=lambda p: p[0])
    )
    return WeightedEligibleList(entries)


def candidate_at(eligible: WeightedEligibleList, index: int) -> CandidateId:
    """Candidate whose contiguous weight block contains ``index``."""
    if not 0 <= index < eligible.index_space:
        raise SpecError(f"index {index} outside [0, {eligible.index_space})")
    pos = bisect_right(eligible._cumulative, index)
    return eligible.entries[pos][0]


def materialize(eligible: WeightedEligibleList) -> list[CandidateId]:
    """Literal repeated-identifier expansion; test oracle for candidate_at."""
    out = []
    for c, w in eligible.entries:
        out.extend([c] * w)
    return out
