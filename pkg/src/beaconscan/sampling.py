"""Beacon-interval-set generators for the evaluation families F1 and F2."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations

from .core import BeaconIntervalSet, classify
from .errors import BudgetExceededError, ValidationError


@dataclass(frozen=True)
class SampleSpec:
    """Generator parameters; the defaults match the evaluation setting.

    F1 draws a cardinality from `f1_cardinality`, then that many distinct
    intervals from `f1_interval_range` (duplicates are redrawn), and divides
    by the GCD. F2 is a deterministic enumeration over `f2_numbers` of
    divisor subsets.
    """

    family: str = "F1"
    seed: int = 0
    f1_cardinality: tuple[int, int] = (3, 6)
    f1_interval_range: tuple[int, int] = (1, 10)
    f2_numbers: tuple[int, int] = (1, 256)
    f2_cardinality: tuple[int, int] = (3, 8)

    def __post_init__(self):
        if self.family not in ("F1", "F2"):
            raise ValidationError(f"family must be 'F1' or 'F2', got {self.family!r}")
        for lo, hi in (self.f1_cardinality, self.f1_interval_range,
                       self.f2_numbers, self.f2_cardinality):
            if lo < 1 or hi < lo:
                raise ValidationError(f"empty or invalid range ({lo}, {hi})")


def f1_space(spec: SampleSpec) -> set[tuple[int, ...]]:
    """Every GCD-normalized set the F1 sampler can produce, by enumeration."""
    lo, hi = spec.f1_interval_range
    kmin, kmax = spec.f1_cardinality
    kmax = min(kmax, hi - lo + 1)
    out: set[tuple[int, ...]] = set()
    values = range(lo, hi + 1)
    for k in range(kmin, kmax + 1):
        for subset in combinations(values, k):
            d = math.gcd(*subset)
            out.add(tuple(b // d for b in subset))
    return out


def sample_f1(spec: SampleSpec, count: int) -> list[BeaconIntervalSet]:
    """Distinct GCD-normalized random sets; fails loudly when the space runs out."""
    if count < 0:
        raise ValidationError("count must be >= 0")
    lo, hi = spec.f1_interval_range
    kmin, kmax = spec.f1_cardinality
    if kmax > hi - lo + 1 and kmin > hi - lo + 1:
        raise ValidationError("cardinality range cannot fit in the interval range")
    space_size = None
    if math.comb(hi - lo + 1, min(kmax, hi - lo + 1)) < 2_000_000:
        space_size = len(f1_space(spec))
        if count > space_size:
            raise BudgetExceededError(
                f"only {space_size} distinct normalized sets exist for this spec, "
                f"cannot produce {count}"
            )
    rng = random.Random(f"f1:{spec.seed}")
    produced: set[tuple[int, ...]] = set()
    out: list[BeaconIntervalSet] = []
    attempts = 0
    max_attempts = max(10_000, 60 * count)
    while len(out) < count:
        attempts += 1
        if space_size is None and attempts > max_attempts:
            raise BudgetExceededError(
                f"no new set after {attempts} draws; the space appears exhausted"
            )
        k = rng.randint(kmin, min(kmax, hi - lo + 1))
        drawn: set[int] = set()
        while len(drawn) < k:
            drawn.add(rng.randint(lo, hi))
        d = math.gcd(*drawn)
        normalized = tuple(sorted(b // d for b in drawn))
        if normalized in produced:
            continue
        produced.add(normalized)
        out.append(classify(normalized))
    return out


def sample_f2(spec: SampleSpec) -> list[BeaconIntervalSet]:
    """All divisor subsets of each base number that contain it and have GCD 1.

    Divisor combinations are walked size by size instead of materializing
    power sets, so highly composite bases stay cheap. Every output satisfies
    max(B) = LCM(B). Fully deterministic.
    """
    lo, hi = spec.f2_numbers
    kmin, kmax = spec.f2_cardinality
    out: list[BeaconIntervalSet] = []
    seen: set[tuple[int, ...]] = set()
    for n in range(lo, hi + 1):
        divisors = [d for d in range(1, n) if n % d == 0]
        for k in range(max(kmin - 1, 0), min(kmax - 1, len(divisors)) + 1):
            if k + 1 < kmin or k + 1 > kmax:
                continue
            for rest in combinations(divisors, k):
                subset = rest + (n,)
                if math.gcd(*subset) != 1:
                    continue
                if subset in seen:
                    continue
                seen.add(subset)
                out.append(classify(subset))
    return out
