"""Domain types and beacon-interval-set algebra.

Time is slotted and 1-indexed: slot t covers the physical interval
[(t-1)*tau, t*tau]. A network configuration (channel, interval b, offset
delta) beacons in slots {delta + i*b, i >= 0} with 1 <= delta <= b.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError

# Exact arithmetic is used for every discovery-time average; floats only
# ever appear in rendered reports.
Rational = Fraction


class Family(enum.IntEnum):
    """Nested beacon-interval-set families, most general first.

    F1: any finite set of positive integers.
    F2: the maximum equals the LCM of the set.
    F3: every element divides every larger element.
    F4: all elements are k*c^e for a common k and base c.
    """

    F1 = 1
    F2 = 2
    F3 = 3
    F4 = 4


def _lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _is_f2(intervals: Sequence[int]) -> bool:
    return max(intervals) == _lcm_all(intervals)


def _is_f3(intervals: Sequence[int]) -> bool:
    ordered = sorted(intervals)
    return all(b2 % b1 == 0 for b1, b2 in zip(ordered, ordered[1:]))


def _integer_roots(n: int) -> list[int]:
    """All integers r >= 2 with r**k == n for some k >= 1."""
    roots = []
    for k in range(1, n.bit_length() + 1):
        r = round(n ** (1.0 / k))
        for cand in (r - 1, r, r + 1):
            if cand >= 2 and cand**k == n:
                roots.append(cand)
    return sorted(set(roots))


def _is_f4(intervals: Sequence[int]) -> bool:
    # b_i = k * c^{e_i} holds iff, after dividing by the GCD (= k * c^{min e}),
    # the set is {c^{f_i}} with min exponent 0. The base, if any, is an
    # integer root of the smallest normalized element above 1.
    d = math.gcd(*intervals) if len(intervals) > 1 else intervals[0]
    reduced = sorted(b // d for b in intervals)
    if reduced == [1] or len(reduced) == 1:
        return True
    if reduced[0] != 1:
        return False
    smallest = reduced[1]
    for base in _integer_roots(smallest):
        if all(_is_power_of(b, base) for b in reduced):
            return True
    return False


def _is_power_of(n: int, base: int) -> bool:
    while n % base == 0:
        n //= base
    return n == 1


_IEEE_802154_MAX_ORDER = 14
_IEEE_80211_MAX = 2**16 - 1


@dataclass(frozen=True)
class BeaconIntervalSet:
    """Validated, sorted set of beacon intervals with derived structure.

    Intervals are unitless slot multiples (physically b*tau seconds).
    ``family`` is the most specific family that holds; membership in a
    coarser family follows from the enum ordering (F4 implies F3 implies
    F2 implies F1).
    """

    intervals: tuple[int, ...]
    gcd: int
    lcm: int
    family: Family
    ieee802154_compatible: bool
    ieee80211_compatible: bool

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def max(self) -> int:
        return self.intervals[-1]

    def in_family(self, family: Family) -> bool:
        return self.family >= family

    def to_json(self) -> str:
        return json.dumps({"intervals": list(self.intervals)})

    @staticmethod
    def from_json(text: str) -> "BeaconIntervalSet":
        # Derived fields are never trusted from disk; only the intervals
        # are read and everything else is recomputed.
        data = json.loads(text)
        if not isinstance(data, dict) or "intervals" not in data:
            raise ValidationError("expected a JSON object with an 'intervals' key")
        return classify(data["intervals"])


def classify(intervals: Iterable[int]) -> BeaconIntervalSet:
    """Sort, deduplicate and classify a collection of beacon intervals."""
    items = sorted(set(intervals))
    if not items:
        raise ValidationError("beacon interval set must be nonempty")
    if any(not isinstance(b, int) or isinstance(b, bool) or b < 1 for b in items):
        raise ValidationError(f"beacon intervals must be positive integers, got {items}")
    if _is_f4(items):
        family = Family.F4
    elif _is_f3(items):
        family = Family.F3
    elif _is_f2(items):
        family = Family.F2
    else:
        family = Family.F1
    return BeaconIntervalSet(
        intervals=tuple(items),
        gcd=math.gcd(*items) if len(items) > 1 else items[0],
        lcm=_lcm_all(items),
        family=family,
        ieee802154_compatible=all(
            b == 1 << (b.bit_length() - 1) and b.bit_length() - 1 <= _IEEE_802154_MAX_ORDER
            for b in items
        ),
        ieee80211_compatible=all(1 <= b <= _IEEE_80211_MAX for b in items),
    )


def coerce_intervals(value) -> BeaconIntervalSet:
    """Accept either a BeaconIntervalSet or any iterable of intervals."""
    if isinstance(value, BeaconIntervalSet):
        return value
    return classify(value)


@dataclass(frozen=True)
class ChannelSet:
    """Channels are identified as 0..count-1."""

    count: int

    def __post_init__(self):
        if not isinstance(self.count, int) or self.count < 1:
            raise ValidationError(f"channel count must be a positive integer, got {self.count!r}")

    def __iter__(self):
        return iter(range(self.count))


def channel_count(value) -> int:
    if isinstance(value, ChannelSet):
        return value.count
    if isinstance(value, int) and not isinstance(value, bool) and value >= 1:
        return value
    raise ValidationError(f"channel count must be a positive integer, got {value!r}")


@dataclass(frozen=True, order=True)
class NetworkConfiguration:
    """A (channel, interval, offset) triple; the unit of discovery."""

    channel: int
    interval: int
    offset: int

    def __post_init__(self):
        if self.channel < 0:
            raise ValidationError(f"channel must be >= 0, got {self.channel}")
        if self.interval < 1:
            raise ValidationError(f"interval must be >= 1, got {self.interval}")
        if not 1 <= self.offset <= self.interval:
            raise ValidationError(
                f"offset must lie in [1, {self.interval}], got {self.offset}"
            )

    def beacons_in(self, slot: int) -> bool:
        return slot >= self.offset and (slot - self.offset) % self.interval == 0

    def first_beacon_at_or_after(self, slot: int) -> int:
        if slot <= self.offset:
            return self.offset
        return slot + (self.offset - slot) % self.interval


@dataclass(frozen=True)
class Environment:
    """Networks under discovery: (network id, configuration) pairs."""

    networks: tuple[tuple[int, NetworkConfiguration], ...]

    def __len__(self) -> int:
        return len(self.networks)


def beacon_offset_at(t: int, b: int) -> int:
    """The unique offset whose interval-b networks beacon in slot t.

    Satisfies t in {delta + i*b, i >= 0} for delta = ((t-1) mod b) + 1.
    """
    if t < 1:
        raise ValidationError(f"time slot must be >= 1, got {t}")
    if b < 1:
        raise ValidationError(f"beacon interval must be >= 1, got {b}")
    return (t - 1) % b + 1


def normalize_gcd(bis) -> tuple[BeaconIntervalSet, int]:
    """Divide every interval by the set's GCD.

    Schedules for the reduced set with slot length tau*d are equivalent to
    schedules for the original set with slot length tau.
    """
    bis = coerce_intervals(bis)
    d = bis.gcd
    return classify(b // d for b in bis.intervals), d


def enumerate_configurations(bis, channels) -> list[NetworkConfiguration]:
    """All |C| * sum(b) configurations, channel-major, then interval, then offset."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    return [
        NetworkConfiguration(c, b, delta)
        for c in range(m)
        for b in bis.intervals
        for delta in range(1, b + 1)
    ]
