"""Closed-form and greedy listening-schedule constructors.

Strategy names used by the CLI and harness: psv, greedy-rnd, greedy-dtr,
greedy-rnd-swt, greedy-dtr-swt, chan-train, opt-b2, genopt.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import beacon_offset_at, channel_count, coerce_intervals
from .errors import ValidationError
from .metrics import ListeningSchedule


class DiscoveryState:
    """Per-configuration discovered flags for one schedule construction.

    Flags only flip false -> true; `remaining` counts the false ones.
    """

    __slots__ = ("intervals", "channels", "_seen", "remaining")

    def __init__(self, bis, channels):
        bis = coerce_intervals(bis)
        self.intervals = bis.intervals
        self.channels = channel_count(channels)
        self._seen: set[tuple[int, int, int]] = set()
        self.remaining = self.channels * sum(self.intervals)

    def new_detections(self, channel: int, slot: int) -> int:
        """How many configurations a scan of `channel` at `slot` would newly discover."""
        return sum(
            1
            for b in self.intervals
            if (channel, b, beacon_offset_at(slot, b)) not in self._seen
        )

    def mark(self, channel: int, slot: int) -> int:
        """Record a scan; returns the number of configurations it discovered."""
        found = 0
        for b in self.intervals:
            key = (channel, b, beacon_offset_at(slot, b))
            if key not in self._seen:
                self._seen.add(key)
                found += 1
        self.remaining -= found
        return found

    def copy(self) -> "DiscoveryState":
        dup = object.__new__(DiscoveryState)
        dup.intervals = self.intervals
        dup.channels = self.channels
        dup._seen = set(self._seen)
        dup.remaining = self.remaining
        return dup


def new_detections(state: DiscoveryState, channel: int, slot: int, bis=None) -> int:
    return state.new_detections(channel, slot)


_TIEBREAK_KINDS = ("rnd", "dtr", "rnd-swt", "dtr-swt")


@dataclass(frozen=True)
class Tiebreak:
    """Channel selection rule among the per-slot detection maximizers.

    dtr picks the highest channel id; rnd picks uniformly at random from a
    stream keyed by (seed, slot); the -swt variants first keep the channel
    scanned in the previous slot when it is a maximizer.
    """

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _TIEBREAK_KINDS:
            raise ValidationError(f"unknown tiebreak {self.kind!r}, expected one of {_TIEBREAK_KINDS}")
        if self.kind.startswith("rnd") and self.seed is None:
            raise ValidationError("random tiebreaks need a seed for reproducibility")

    @property
    def sticky(self) -> bool:
        return self.kind.endswith("-swt")

    def pick(self, maximizers: list[int], slot: int, previous: int | None) -> int:
        if self.sticky and previous is not None and previous in maximizers:
            return previous
        if self.kind.startswith("dtr"):
            return max(maximizers)
        # One independent stream per slot so that runs are reproducible and
        # insensitive to how many draws earlier slots consumed.
        return random.Random(f"{self.seed}:{slot}").choice(maximizers)


def psv(bis, channels) -> ListeningSchedule:
    """Sequential sweep: channel j is scanned for slots [j*max(B)+1, (j+1)*max(B)].

    Complete with makespan max(B)*|C| and |C|-1 switches for any interval set.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    span = bis.max
    entries = {}
    for c in range(m):
        for t in range(c * span + 1, (c + 1) * span + 1):
            entries[t] = c
    return ListeningSchedule(entries, num_channels=m)


def greedy(bis, channels, tiebreak: Tiebreak) -> ListeningSchedule:
    """Scan a channel maximizing new detections each slot; idle when all are zero."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    state = DiscoveryState(bis, m)
    horizon = bis.lcm * m
    entries: dict[int, int] = {}
    t = 0
    while state.remaining:
        t += 1
        if t > horizon:
            raise RuntimeError(
                f"greedy did not complete by slot {horizon}; this contradicts the "
                "LCM(B)*|C| termination bound"
            )
        counts = [state.new_detections(c, t) for c in range(m)]
        best = max(counts)
        if best == 0:
            continue
        maximizers = [c for c in range(m) if counts[c] == best]
        chosen = tiebreak.pick(maximizers, t, entries.get(t - 1))
        entries[t] = chosen
        state.mark(chosen, t)
    return ListeningSchedule(entries, num_channels=m)


def chan_train(bis, channels, frozen_lookahead: bool = False) -> ListeningSchedule:
    """Greedy variant that commits to runs of consecutive slots per channel.

    At each decision slot, among channels maximizing new detections, it
    scores each candidate by (length of the run of future slots on that
    channel that each still yield at least as many detections) plus (length
    of the run of immediately preceding slots already on that channel), and
    commits the whole future run of the best-scoring channel. Ties go to the
    lowest channel id. By default the look-ahead lets discoveries accumulate
    along the simulated run; `frozen_lookahead` scores against the state at
    the decision slot instead.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    state = DiscoveryState(bis, m)
    horizon = bis.lcm * m
    entries: dict[int, int] = {}
    t = 1
    while state.remaining:
        if t > horizon:
            raise RuntimeError(f"chan_train did not complete by slot {horizon}")
        counts = [state.new_detections(c, t) for c in range(m)]
        best = max(counts)
        if best == 0:
            t += 1
            continue
        maximizers = [c for c in range(m) if counts[c] == best]
        scores = []
        for c in maximizers:
            run = _future_run(state, c, t, best, horizon, frozen_lookahead)
            back = 0
            while entries.get(t - 1 - back) == c:
                back += 1
            scores.append((run + back, -c, run, c))
        _, _, run, chosen = max(scores)
        for step in range(run):
            if state.remaining == 0:
                break
            entries[t + step] = chosen
            state.mark(chosen, t + step)
        t += run
    return ListeningSchedule(entries, num_channels=m)


def _future_run(state, channel, start, threshold, horizon, frozen) -> int:
    probe = state.copy()
    run = 0
    t = start
    while t <= horizon:
        if frozen:
            if state.new_detections(channel, t) < threshold:
                break
        else:
            if probe.new_detections(channel, t) < threshold:
                break
            probe.mark(channel, t)
        run += 1
        t += 1
    return run


def opt_b2(b1: int, b2: int, channels) -> ListeningSchedule:
    """Two-interval schedule that is recursive for every b1 < b2 and channel count.

    Channel j (1-based) scans [(j-1)*b1+1, j*b1] and then
    [m*b1 + (m-j)*(b2-b1) + 1, m*b1 + (m-j+1)*(b2-b1)].
    """
    if not (isinstance(b1, int) and isinstance(b2, int)) or b1 < 1:
        raise ValidationError("intervals must be positive integers")
    if b1 >= b2:
        raise ValidationError(f"need b1 < b2, got b1={b1}, b2={b2}")
    m = channel_count(channels)
    entries: dict[int, int] = {}
    gap = b2 - b1
    for j in range(1, m + 1):
        for t in range((j - 1) * b1 + 1, j * b1 + 1):
            entries[t] = j - 1
        lo = m * b1 + (m - j) * gap
        for t in range(lo + 1, lo + gap + 1):
            entries[t] = j - 1
    return ListeningSchedule(entries, num_channels=m)


STRATEGY_NAMES = (
    "psv",
    "greedy-rnd",
    "greedy-dtr",
    "greedy-rnd-swt",
    "greedy-dtr-swt",
    "chan-train",
    "opt-b2",
    "genopt",
)


def build_schedule(name: str, bis, channels, seed: int | None = None) -> ListeningSchedule:
    """Construct a schedule by strategy name (genopt via its default options)."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    if name == "psv":
        return psv(bis, m)
    if name.startswith("greedy-"):
        kind = name[len("greedy-"):]
        if kind.startswith("rnd") and seed is None:
            seed = 0
        return greedy(bis, m, Tiebreak(kind, seed))
    if name == "chan-train":
        return chan_train(bis, m)
    if name == "opt-b2":
        if len(bis) != 2:
            raise ValidationError("opt-b2 requires exactly two beacon intervals")
        return opt_b2(bis.intervals[0], bis.intervals[1], m)
    if name == "genopt":
        from .genopt import GenoptOptions, genopt

        return genopt(bis, m, GenoptOptions(seed=seed if seed is not None else 0)).schedule
    raise ValidationError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")
