"""Listening-schedule representation, validity predicates and metrics.

All averages are exact rationals. Metrics that are only meaningful for
complete schedules (EMDT, makespan, active/idle counts) refuse partial
schedules instead of returning partial values; `undiscovered_configurations`
is the companion coverage report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .core import (
    BeaconIntervalSet,
    Environment,
    NetworkConfiguration,
    beacon_offset_at,
    channel_count,
    coerce_intervals,
    enumerate_configurations,
)
from .errors import IncompleteScheduleError, ValidationError


class ListeningSchedule:
    """Finite map from time slot (>= 1) to the single channel scanned there."""

    __slots__ = ("_entries", "_slots")

    def __init__(self, entries, num_channels: int | None = None):
        if isinstance(entries, Mapping):
            pairs = entries.items()
        else:
            pairs = list(entries)
        table: dict[int, int] = {}
        for slot, channel in pairs:
            if not isinstance(slot, int) or slot < 1:
                raise ValidationError(f"slots must be integers >= 1, got {slot!r}")
            if not isinstance(channel, int) or channel < 0:
                raise ValidationError(f"channels must be integers >= 0, got {channel!r}")
            if slot in table and table[slot] != channel:
                raise ValidationError(f"slot {slot} assigned to two channels")
            if num_channels is not None and channel >= num_channels:
                raise ValidationError(
                    f"channel {channel} out of range for {num_channels} channels"
                )
            table[slot] = channel
        self._entries = table
        self._slots = tuple(sorted(table))

    @property
    def horizon(self) -> int:
        """Largest referenced slot; 0 for the empty schedule."""
        return self._slots[-1] if self._slots else 0

    def channel_at(self, slot: int) -> int | None:
        return self._entries.get(slot)

    def items(self) -> Iterable[tuple[int, int]]:
        """(slot, channel) pairs in increasing slot order."""
        for slot in self._slots:
            yield slot, self._entries[slot]

    def slots_on(self, channel: int) -> list[int]:
        return [t for t in self._slots if self._entries[t] == channel]

    def __len__(self) -> int:
        return len(self._slots)

    def __eq__(self, other) -> bool:
        return isinstance(other, ListeningSchedule) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{t}:c{c}" for t, c in self.items())
        return f"ListeningSchedule({{{inner}}})"


def schedule_to_json(schedule: ListeningSchedule, bis, channels) -> str:
    """Serialize a schedule with its ambient interval set and channel count."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    payload = {
        "channels": m,
        "intervals": list(bis.intervals),
        "entries": [{"slot": t, "channel": c} for t, c in schedule.items()],
    }
    return json.dumps(payload)


def schedule_from_json(text: str) -> tuple[ListeningSchedule, BeaconIntervalSet, int]:
    data = json.loads(text)
    try:
        m = data["channels"]
        bis = coerce_intervals(data["intervals"])
        entries = [(e["slot"], e["channel"]) for e in data["entries"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed schedule JSON: {exc}") from exc
    m = channel_count(m)
    slots = [slot for slot, _ in entries]
    if any(b <= a for a, b in zip(slots, slots[1:])):
        raise ValidationError("schedule entries must have strictly increasing slots")
    return ListeningSchedule(entries, num_channels=m), bis, m


def discovery_times(
    schedule: ListeningSchedule, bis, channels
) -> dict[NetworkConfiguration, int]:
    """First scanned beaconing slot per configuration; absent if never scanned."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    times: dict[NetworkConfiguration, int] = {}
    total = m * sum(bis.intervals)
    for t, c in schedule.items():
        if c >= m:
            raise ValidationError(f"schedule uses channel {c} but only {m} channels exist")
        for b in bis.intervals:
            kappa = NetworkConfiguration(c, b, beacon_offset_at(t, b))
            if kappa not in times:
                times[kappa] = t
                if len(times) == total:
                    return times
    return times


def undiscovered_configurations(
    schedule: ListeningSchedule, bis, channels
) -> list[NetworkConfiguration]:
    found = discovery_times(schedule, bis, channels)
    return [k for k in enumerate_configurations(bis, channels) if k not in found]


def is_complete(schedule: ListeningSchedule, bis, channels) -> bool:
    """True iff every configuration's beacon schedule intersects the scans."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    return len(discovery_times(schedule, bis, m)) == m * sum(bis.intervals)


def _require_complete(schedule, bis, channels) -> dict[NetworkConfiguration, int]:
    times = discovery_times(schedule, bis, channels)
    total = channel_count(channels) * sum(coerce_intervals(bis).intervals)
    if len(times) != total:
        missing = total - len(times)
        raise IncompleteScheduleError(
            f"schedule leaves {missing} of {total} configurations undiscovered; "
            "see undiscovered_configurations() for the coverage report"
        )
    return times


def emdt(schedule: ListeningSchedule, bis, channels) -> Fraction:
    """Expected mean discovery time under uniform configuration probabilities.

    EMDT = (1 / (|B||C|)) * sum over configurations of T_kappa / b_kappa.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    times = _require_complete(schedule, bis, m)
    total = sum(Fraction(t, kappa.interval) for kappa, t in times.items())
    return total / (len(bis) * m)


def mdt(schedule: ListeningSchedule, environment: Environment) -> Fraction:
    """Mean discovery time over the networks of one particular environment."""
    if not environment.networks:
        raise ValidationError("MDT is undefined for an empty environment")
    total = 0
    for nid, kappa in environment.networks:
        t = _network_discovery_time(schedule, kappa)
        if t is None:
            raise IncompleteScheduleError(f"network {nid} ({kappa}) is never discovered")
        total += t
    return Fraction(total, len(environment.networks))


def _network_discovery_time(schedule: ListeningSchedule, kappa: NetworkConfiguration):
    for t, c in schedule.items():
        if c == kappa.channel and kappa.beacons_in(t):
            return t
    return None


def makespan(schedule: ListeningSchedule, bis, channels) -> int:
    """Slot at which the last configuration is discovered."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    times = _require_complete(schedule, bis, m)
    span = max(times.values())
    assert span >= bis.max * m, "complete schedule beat the makespan lower bound"
    return span


def channel_switches(schedule: ListeningSchedule) -> int:
    """Adjacent active-slot pairs with differing channels.

    Idle gaps do not reset the tuned channel: scanning c0, idling, then
    scanning c0 again counts zero switches.
    """
    switches = 0
    previous = None
    for _, c in schedule.items():
        if previous is not None and c != previous:
            switches += 1
        previous = c
    return switches


def active_idle_counts(schedule: ListeningSchedule, bis, channels) -> tuple[int, int]:
    """(active, idle) slot counts within [1, makespan]."""
    span = makespan(schedule, bis, channels)
    active = sum(1 for t, _ in schedule.items() if t <= span)
    return active, span - active


def is_recursive(schedule: ListeningSchedule, bis, channels) -> bool:
    """No idle slots up to max(B)*|C| and no redundant scans in any b-window.

    A scan is redundant for interval b when an earlier scan in [1, b*|C|]
    already covered the same (channel, offset class) pair.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    window = bis.max * m
    per_slot = {t: c for t, c in schedule.items()}
    if any(t not in per_slot for t in range(1, window + 1)):
        return False
    for b in bis.intervals:
        seen: set[tuple[int, int]] = set()
        for t in range(1, b * m + 1):
            key = (per_slot[t], beacon_offset_at(t, b))
            if key in seen:
                return False
            seen.add(key)
    return True


def repair_to_lcm_bound(schedule: ListeningSchedule, bis, channels) -> ListeningSchedule:
    """Pull every discovery later than LCM(B)*|C| inside the bound.

    Uses the two move rules: a late scan moves into an idle slot of the
    configuration's LCM-spaced beacon slots, or replaces one of two scans
    some other channel spends on equivalent slots there. Removing the
    original late scan is skipped when that would lose or delay another
    configuration co-discovered by it, which keeps discovery times
    pointwise non-increasing for arbitrary complete schedules.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    _require_complete(schedule, bis, m)
    bound = bis.lcm * m
    entries = dict(schedule.items())

    def times_of(table):
        return discovery_times(ListeningSchedule(table), bis, m)

    times = times_of(entries)
    guard = len(times) + 1
    while True:
        late = [(t, k) for k, t in times.items() if t > bound]
        if not late:
            break
        guard -= 1
        assert guard > 0, "repair failed to terminate"
        _, kappa = max(late, key=lambda item: (item[0], item[1]))
        periodic = [kappa.offset + i * bis.lcm for i in range(m)]
        assert all(entries.get(t) != kappa.channel for t in periodic)
        idle = [t for t in periodic if t not in entries]
        old_slot = times[kappa]
        if idle:
            entries[idle[0]] = kappa.channel
        else:
            by_channel: dict[int, list[int]] = {}
            for t in periodic:
                by_channel.setdefault(entries[t], []).append(t)
            dup_slots = next(v for v in by_channel.values() if len(v) >= 2)
            entries[dup_slots[-1]] = kappa.channel
        # Drop the late scan only if nothing was first-discovered by it.
        candidate = dict(entries)
        del candidate[old_slot]
        new_times = times_of(candidate)
        if len(new_times) == len(times) and all(
            new_times[k] <= times[k] for k in times
        ):
            entries = candidate
            times = new_times
        else:
            times = times_of(entries)
    return ListeningSchedule(entries)


@dataclass(frozen=True)
class MetricsReport:
    """All schedule performance metrics in one record."""

    makespan: int
    emdt: Fraction
    channel_switches: int
    active_slots: int
    idle_slots: int
    discovery_times: dict[NetworkConfiguration, int]

    CSV_HEADER = "makespan,emdt_num,emdt_den,switches,active,idle"

    def to_csv_row(self) -> str:
        return (
            f"{self.makespan},{self.emdt.numerator},{self.emdt.denominator},"
            f"{self.channel_switches},{self.active_slots},{self.idle_slots}"
        )

    def to_csv(self) -> str:
        return f"{self.CSV_HEADER}\n{self.to_csv_row()}\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "makespan": self.makespan,
                "emdt_num": self.emdt.numerator,
                "emdt_den": self.emdt.denominator,
                "switches": self.channel_switches,
                "active": self.active_slots,
                "idle": self.idle_slots,
                "discovery_times": [
                    {
                        "channel": k.channel,
                        "interval": k.interval,
                        "offset": k.offset,
                        "slot": t,
                    }
                    for k, t in sorted(self.discovery_times.items())
                ],
            }
        )


def compute_metrics(schedule: ListeningSchedule, bis, channels) -> MetricsReport:
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    times = _require_complete(schedule, bis, m)
    span = max(times.values())
    active = sum(1 for t, _ in schedule.items() if t <= span)
    return MetricsReport(
        makespan=span,
        emdt=sum(Fraction(t, k.interval) for k, t in times.items()) / (len(bis) * m),
        channel_switches=channel_switches(schedule),
        active_slots=active,
        idle_slots=span - active,
        discovery_times=times,
    )
