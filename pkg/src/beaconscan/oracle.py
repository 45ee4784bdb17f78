"""Brute-force ground truth for small instances.

Deliberately independent of the genopt solver: the admissible bound and
all tables are re-derived here from beacon enumeration, the decision tree
keeps idle among the per-slot choices, and no dominance rules are applied.
Budgets abort the search with an explicit error instead of ever returning
an unproven answer.

Witnesses are the lexicographically smallest optimal decision sequence,
with per-slot decisions ordered channel 0 < channel 1 < ... < idle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import channel_count, coerce_intervals
from .errors import BudgetExceededError

DEFAULT_MAX_SLOTS = 20
DEFAULT_MAX_NODES = 5_000_000


@dataclass(frozen=True)
class OracleBudget:
    """Hard caps for the exhaustive searches."""

    max_slots: int = DEFAULT_MAX_SLOTS
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        if self.max_slots < 1 or self.max_nodes < 1:
            raise ValueError("budget caps must be positive")


@dataclass(frozen=True)
class OracleResult:
    value: object  # Fraction for EMDT, int for makespan, bool for existence
    witness: "object | None"
    nodes: int


class _Tables:
    """Interval-major config indexing and per-slot coverage, built by
    enumerating beacon slots directly."""

    def __init__(self, bis, m: int, horizon: int):
        self.m = m
        self.intervals = bis.intervals
        self.lcm = bis.lcm
        self.horizon = horizon
        index: dict[tuple[int, int, int], int] = {}
        weights = []
        for b in bis.intervals:
            for delta in range(1, b + 1):
                for c in range(m):
                    index[(b, delta, c)] = len(weights)
                    weights.append(bis.lcm // b)
        self.index = index
        self.weights = weights
        self.n = len(weights)
        self.all_mask = (1 << self.n) - 1
        # hits[c][t] for t in 1..horizon: configs whose beacon schedule
        # contains (c, t), found by walking each beacon train.
        self.hits = [[0] * (horizon + 1) for _ in range(m)]
        for (b, delta, c), i in index.items():
            t = delta
            while t <= horizon:
                self.hits[c][t] |= 1 << i
                t += b
        # next_at[i][t]: first beaconing slot >= t of config i, with a
        # sentinel of horizon+1 once the train has run out.
        sentinel = horizon + 1
        self.next_at = []
        for (b, delta, _c), _i in sorted(index.items(), key=lambda kv: kv[1]):
            row = [sentinel] * (horizon + 2)
            nxt = sentinel
            for t in range(horizon, 0, -1):
                if t >= delta and (t - delta) % b == 0:
                    nxt = t
                row[t] = nxt
            self.next_at.append(row)
        self.groups = [
            (c, b, self._group_mask(c, b)) for c in range(m) for b in bis.intervals
        ]

    def _group_mask(self, c: int, b: int) -> int:
        mask = 0
        for delta in range(1, b + 1):
            mask |= 1 << self.index[(b, delta, c)]
        return mask


def _sweep_schedule_value(tables: _Tables, m: int) -> tuple[int, int]:
    """Scaled objective of a sequential per-channel sweep; used only to seed
    the incumbent so bound pruning starts immediately."""
    span = max(tables.intervals)
    discovered = 0
    value = 0
    for c in range(m):
        for t in range(c * span + 1, (c + 1) * span + 1):
            new = tables.hits[c][t] & ~discovered if t <= tables.horizon else 0
            discovered |= new
            while new:
                low = new & -new
                value += tables.weights[low.bit_length() - 1] * t
                new ^= low
    return value, discovered


def optimal_emdt(bis, channels, budget: OracleBudget | None = None) -> OracleResult:
    """True minimum EMDT over complete schedules, with one witness.

    Exhaustive DFS over per-slot decisions (each channel, then idle) up to
    horizon LCM(B)*|C|, pruned by the admissible bound: accrued weighted
    discovery plus, for each undiscovered configuration, its weight times
    the earliest beaconing slot not yet passed. Subtrees that can no longer
    complete within the horizon (a configuration out of beaconing slots, or
    a channel needing more slots than remain) are dead and dropped.
    """
    from .metrics import ListeningSchedule

    bis = coerce_intervals(bis)
    m = channel_count(channels)
    budget = budget or OracleBudget()
    horizon = bis.lcm * m
    if horizon > budget.max_slots:
        raise BudgetExceededError(
            f"required horizon LCM(B)*|C| = {horizon} exceeds max_slots = {budget.max_slots}"
        )
    tables = _Tables(bis, m, horizon)
    scale = len(bis) * m * bis.lcm
    sweep_value, sweep_mask = _sweep_schedule_value(tables, m)
    assert sweep_mask == tables.all_mask, "sequential sweep must be complete"

    best = {"value": sweep_value + 1, "entries": None}
    nodes = [0]
    memo: dict[tuple[int, int], int] = {}

    def lower_bound(t: int, discovered: int, accrued: int):
        # Max of two relaxations: each configuration at its earliest future
        # beaconing slot, and the scan-token packing: a scan covers at most
        # one offset class per interval, so channel c still needs
        # max_b(#classes left of (c, b)) scans whose j-th one collects at
        # most the weight of intervals with >= j classes left; scan slots
        # are disjoint across channels, so descending tokens paired with
        # slots t, t+1, ... ascending is a lower bound.
        est = accrued
        where = min(t, horizon + 1)
        per_channel: dict[int, list[int]] = {}
        for c, b, gmask in tables.groups:
            size = 0
            remaining = gmask & ~discovered
            while remaining:
                low = remaining & -remaining
                i = low.bit_length() - 1
                nxt = tables.next_at[i][where]
                if nxt > horizon:
                    return None
                est += tables.weights[i] * nxt
                size += 1
                remaining ^= low
            if size:
                arr = per_channel.setdefault(c, [])
                while len(arr) < size:
                    arr.append(0)
                w = tables.lcm // b
                for j in range(size):
                    arr[j] += w
        tokens = [w for arr in per_channel.values() for w in arr]
        if tokens:
            if t + len(tokens) - 1 > horizon:
                return None
            tokens.sort(reverse=True)
            alt = accrued + sum(w * (t + k) for k, w in enumerate(tokens))
            if alt > est:
                est = alt
        return est

    def search(t: int, discovered: int, accrued: int, entries: dict[int, int]):
        nodes[0] += 1
        if nodes[0] > budget.max_nodes:
            raise BudgetExceededError(
                f"node budget {budget.max_nodes} exhausted at {nodes[0]} nodes"
            )
        if discovered == tables.all_mask:
            if accrued < best["value"]:
                best["value"] = accrued
                best["entries"] = dict(entries)
            return
        if t > horizon:
            return
        seen = memo.get((t, discovered))
        if seen is not None and seen <= accrued:
            return
        if len(memo) < 2_000_000 or seen is not None:
            memo[(t, discovered)] = accrued
        for c in range(m):
            new = tables.hits[c][t] & ~discovered
            gained = accrued
            probe = new
            while probe:
                low = probe & -probe
                gained += tables.weights[low.bit_length() - 1] * t
                probe ^= low
            bound = lower_bound(t + 1, discovered | new, gained)
            if bound is None or bound >= best["value"]:
                continue
            entries[t] = c
            search(t + 1, discovered | new, gained, entries)
            del entries[t]
        bound = lower_bound(t + 1, discovered, accrued)
        if bound is not None and bound < best["value"]:
            search(t + 1, discovered, accrued, entries)

    search(1, 0, 0, {})
    assert best["entries"] is not None or best["value"] == sweep_value + 1
    if best["entries"] is None:
        # Nothing beat the seeded sweep bound, which cannot happen: the sweep
        # itself is a feasible leaf with value sweep_value < sweep_value + 1.
        raise AssertionError("search missed the seeded sweep schedule")
    value = Fraction(best["value"], scale)
    witness = ListeningSchedule(best["entries"], num_channels=m)
    return OracleResult(value, witness, nodes[0])


def optimal_makespan(bis, channels, budget: OracleBudget | None = None) -> OracleResult:
    """Minimum makespan over complete schedules, by iterative deepening.

    For each candidate horizon starting at the max(B)*|C| lower bound, a
    backtracking search looks for any complete schedule confined to it.
    Idle slots never help feasibility, so decisions are channels only.
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    budget = budget or OracleBudget()
    lower = bis.max * m
    nodes_total = 0
    for horizon in range(lower, bis.lcm * m + 1):
        if horizon > budget.max_slots:
            raise BudgetExceededError(
                f"candidate horizon {horizon} exceeds max_slots = {budget.max_slots}"
            )
        tables = _Tables(bis, m, horizon)
        found, nodes = _feasible_within(tables, m, horizon, budget, nodes_total)
        nodes_total = nodes
        if found:
            return OracleResult(horizon, None, nodes_total)
    raise AssertionError("no complete schedule within LCM(B)*|C|, contradicting theory")


def _feasible_within(tables: _Tables, m, horizon, budget, nodes_start):
    nodes = [nodes_start]
    dead: set[tuple[int, int]] = set()

    def demand_exceeds(t: int, discovered: int) -> bool:
        per_channel: dict[int, int] = {}
        for c, b, gmask in tables.groups:
            count = (gmask & ~discovered).bit_count()
            if count > per_channel.get(c, 0):
                per_channel[c] = count
        return sum(per_channel.values()) > horizon - t + 1

    def reachable(t: int, discovered: int) -> bool:
        remaining = tables.all_mask & ~discovered
        while remaining:
            low = remaining & -remaining
            if tables.next_at[low.bit_length() - 1][t] > horizon:
                return False
            remaining ^= low
        return True

    def search(t: int, discovered: int) -> bool:
        nodes[0] += 1
        if nodes[0] > budget.max_nodes:
            raise BudgetExceededError(f"node budget {budget.max_nodes} exhausted")
        if discovered == tables.all_mask:
            return True
        if t > horizon:
            return False
        if (t, discovered) in dead:
            return False
        if not reachable(t, discovered) or demand_exceeds(t, discovered):
            return False
        for c in range(m):
            if search(t + 1, discovered | (tables.hits[c][t] & ~discovered)):
                return True
        if len(dead) < 2_000_000:
            dead.add((t, discovered))
        return False

    ok = search(1, 0)
    return ok, nodes[0]


def recursive_exists(bis, channels, budget: OracleBudget | None = None) -> OracleResult:
    """Whether a schedule with no idle slots and no redundant scans exists.

    Backtracking over slots 1..max(B)*|C|: each slot must scan some channel,
    and within every window [1, b*|C|] no (channel, offset class of b) pair
    may repeat. Channels are interchangeable, so among never-used channels
    only the lowest is tried; the witness is the lexicographically smallest
    assignment, which is canonical in that order anyway.
    """
    from .metrics import ListeningSchedule

    bis = coerce_intervals(bis)
    m = channel_count(channels)
    budget = budget or OracleBudget()
    window = bis.max * m
    if window > budget.max_slots:
        raise BudgetExceededError(
            f"recursive window max(B)*|C| = {window} exceeds max_slots = {budget.max_slots}"
        )
    used: list[set[tuple[int, int]]] = [set() for _ in bis.intervals]
    assignment: list[int] = []
    nodes = [0]

    def search(t: int, used_channels: int) -> bool:
        nodes[0] += 1
        if nodes[0] > budget.max_nodes:
            raise BudgetExceededError(f"node budget {budget.max_nodes} exhausted")
        if t > window:
            return True
        lowest_fresh = None
        for c in range(m):
            if not used_channels >> c & 1:
                lowest_fresh = c
                break
        for c in range(m):
            if not used_channels >> c & 1 and c != lowest_fresh:
                continue
            keys = []
            ok = True
            for k, b in enumerate(bis.intervals):
                if t <= b * m:
                    key = (c, (t - 1) % b + 1)
                    if key in used[k]:
                        ok = False
                        break
                    keys.append((k, key))
            if not ok:
                continue
            for k, key in keys:
                used[k].add(key)
            assignment.append(c)
            if search(t + 1, used_channels | (1 << c)):
                return True
            assignment.pop()
            for k, key in keys:
                used[k].remove(key)
        return False

    if search(1, 0):
        witness = ListeningSchedule(
            {t + 1: c for t, c in enumerate(assignment)}, num_channels=m
        )
        return OracleResult(True, witness, nodes[0])
    return OracleResult(False, None, nodes[0])
