"""Integer program for EMDT-minimal schedules over a bounded horizon.

Binary x_{c,t,b} says configuration (c, b, offset-class of t) is credited
at slot t; binary h_{c,t} says channel c is scanned at t. Constraints:
C1 credits each configuration exactly once, C2 ties credits to scans,
C3 allows at most one channel per slot. The objective is
(1/(|C||B|)) * sum x_{c,t,b} * t / b, i.e. the EMDT of the decoded schedule.

The built-in exact solver branches over per-slot decisions (a channel or
idle) rather than raw 0/1 variables; credits are implied by first coverage,
which preserves the optimum on an exponentially smaller tree. No external
solver is linked; `export_lp`/`import_solution` are the file-based bridge.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .core import NetworkConfiguration, beacon_offset_at, channel_count, coerce_intervals
from .errors import BudgetExceededError, ValidationError
from .metrics import ListeningSchedule, discovery_times, makespan
from .strategies import Tiebreak, greedy

DEFAULT_SOLVE_BUDGET = 4096


@dataclass(frozen=True)
class GenoptModel:
    """Model data for one (intervals, channels, horizon) triple."""

    intervals: tuple[int, ...]
    num_channels: int
    t_max: int
    lcm: int

    @property
    def num_x(self) -> int:
        return self.num_channels * self.t_max * len(self.intervals)

    @property
    def num_h(self) -> int:
        return self.num_channels * self.t_max

    def coverage_rows(self):
        """C1 rows: ((c, b, delta), slots) with slots = {m*b + delta} ∩ [1, t_max]."""
        for c in range(self.num_channels):
            for b in self.intervals:
                for delta in range(1, b + 1):
                    slots = list(range(delta, self.t_max + 1, b))
                    yield (c, b, delta), slots

    def objective_coefficient(self, t: int, b: int) -> Fraction:
        return Fraction(t, b * len(self.intervals) * self.num_channels)


def build_model(bis, channels, t_max: int) -> GenoptModel:
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    if t_max < bis.max:
        raise ValidationError(
            f"horizon {t_max} is below max(B)={bis.max}; some offset class would "
            "have no coverage slot at all"
        )
    if t_max > bis.lcm * m:
        raise ValidationError(
            f"horizon {t_max} exceeds LCM(B)*|C| = {bis.lcm * m}; larger horizons "
            "cannot improve the objective"
        )
    return GenoptModel(bis.intervals, m, t_max, bis.lcm)


@dataclass(frozen=True)
class SolveOutcome:
    schedule: ListeningSchedule | None
    objective: Fraction | None
    status: str  # "proven-optimal" | "bound-gap" | "infeasible"
    gap: Fraction | None = None
    nodes: int = 0
    horizon: int = 0


# ---------------------------------------------------------------------------
# LP text export / solution import
# ---------------------------------------------------------------------------


def _coef_str(value: Fraction) -> str:
    # repr(float) is the shortest string that round-trips through a double,
    # which is what LP-reading solvers parse anyway.
    return repr(float(value))


def export_lp(model: GenoptModel) -> str:
    """Deterministic CPLEX-style LP text for the model."""
    lines = [
        f"\\ EMDT minimization: channels={model.num_channels} "
        f"intervals={','.join(map(str, model.intervals))} horizon={model.t_max}",
        "Minimize",
    ]
    terms = []
    for c in range(model.num_channels):
        for t in range(1, model.t_max + 1):
            for b in model.intervals:
                coef = model.objective_coefficient(t, b)
                terms.append(f"{_coef_str(coef)} x_{c}_{t}_{b}")
    lines.extend(_wrap_terms("obj:", terms))
    lines.append("Subject To")
    for (c, b, delta), slots in model.coverage_rows():
        row = [f"x_{c}_{t}_{b}" for t in slots]
        lines.extend(_wrap_terms(f"cover_{c}_{b}_{delta}:", row, tail="= 1"))
    for c in range(model.num_channels):
        for t in range(1, model.t_max + 1):
            for b in model.intervals:
                lines.append(f" link_{c}_{t}_{b}: x_{c}_{t}_{b} - h_{c}_{t} <= 0")
    for t in range(1, model.t_max + 1):
        row = [f"h_{c}_{t}" for c in range(model.num_channels)]
        lines.extend(_wrap_terms(f"single_{t}:", row, tail="<= 1"))
    lines.append("Binary")
    for c in range(model.num_channels):
        for t in range(1, model.t_max + 1):
            for b in model.intervals:
                lines.append(f" x_{c}_{t}_{b}")
    for c in range(model.num_channels):
        for t in range(1, model.t_max + 1):
            lines.append(f" h_{c}_{t}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _wrap_terms(label: str, terms: list[str], tail: str | None = None, width: int = 200):
    pieces = []
    line = f" {label}"
    for i, term in enumerate(terms):
        joined = term if i == 0 else f"+ {term}"
        if len(line) + len(joined) + 1 > width:
            pieces.append(line)
            line = "   " + joined
        else:
            line += " " + joined
    if tail:
        line += f" {tail}"
    pieces.append(line)
    return pieces


def import_solution(text: str) -> dict[str, int]:
    """Parse 'name value' lines as produced by LP solvers' solution files."""
    assignment: dict[str, int] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("#", "\\", "//")):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValidationError(f"cannot parse solution line {raw!r}")
        name, value = parts[0], float(parts[1])
        rounded = round(value)
        if abs(value - rounded) > 1e-6 or rounded not in (0, 1):
            raise ValidationError(f"variable {name} has non-binary value {value}")
        assignment[name] = rounded
    return assignment


def decode(model: GenoptModel, assignment: dict[str, int]) -> ListeningSchedule:
    """Turn an x/h assignment into a schedule, verifying C1-C3 first."""
    for t in range(1, model.t_max + 1):
        scanned = [c for c in range(model.num_channels) if assignment.get(f"h_{c}_{t}")]
        if len(scanned) > 1:
            raise ValidationError(f"slot {t} scans {len(scanned)} channels (C3 violated)")
    for (c, b, delta), slots in model.coverage_rows():
        hits = [t for t in slots if assignment.get(f"x_{c}_{t}_{b}")]
        if len(hits) != 1:
            raise ValidationError(
                f"configuration (c={c}, b={b}, offset={delta}) is credited "
                f"{len(hits)} times (C1 violated)"
            )
        if not assignment.get(f"h_{c}_{hits[0]}"):
            raise ValidationError(
                f"x_{c}_{hits[0]}_{b} is set without h_{c}_{hits[0]} (C2 violated)"
            )
    entries = {
        t: c
        for t in range(1, model.t_max + 1)
        for c in range(model.num_channels)
        if assignment.get(f"h_{c}_{t}")
    }
    schedule = ListeningSchedule(entries, num_channels=model.num_channels)
    times = discovery_times(schedule, model.intervals, model.num_channels)
    for name, value in assignment.items():
        if value and name.startswith("x_"):
            c, t, b = map(int, name.split("_")[1:])
            kappa = NetworkConfiguration(c, b, beacon_offset_at(t, b))
            if kappa not in times or times[kappa] > t:
                raise ValidationError(
                    f"{name} credits a detection before the schedule can make it"
                )
    return schedule


def redundant_scans(model: GenoptModel, assignment: dict[str, int]) -> list[int]:
    """Scanned slots whose h is set but which credit no detection."""
    out = []
    for t in range(1, model.t_max + 1):
        for c in range(model.num_channels):
            if assignment.get(f"h_{c}_{t}") and not any(
                assignment.get(f"x_{c}_{t}_{b}") for b in model.intervals
            ):
                out.append(t)
    return out


def solution_from_schedule(model: GenoptModel, schedule: ListeningSchedule) -> dict[str, int]:
    """The x/h assignment a schedule induces (credits at first coverage)."""
    assignment: dict[str, int] = {}
    for t, c in schedule.items():
        if t <= model.t_max:
            assignment[f"h_{c}_{t}"] = 1
    times = discovery_times(schedule, model.intervals, model.num_channels)
    for kappa, t in times.items():
        assignment[f"x_{kappa.channel}_{t}_{kappa.interval}"] = 1
    return assignment


# ---------------------------------------------------------------------------
# Exact solver: branch and bound over per-slot decisions
# ---------------------------------------------------------------------------


class _BranchAndBound:
    """DFS over (slot -> channel | idle) decisions with an admissible bound.

    Objective is kept as the integer sum(weight_i * T_i) with
    weight_i = LCM/b_i; dividing by |B|*|C|*LCM recovers the EMDT exactly.
    The admissible bound adds, for each undiscovered configuration, its
    weight times the earliest feasible future beaconing slot.
    """

    def __init__(self, model: GenoptModel, prefer_small_makespan: bool = False):
        self.model = model
        self.m = model.num_channels
        self.t_max = model.t_max
        self.lcm = model.lcm
        intervals = model.intervals
        self.scale = len(intervals) * self.m * self.lcm
        self.prefer_small_makespan = prefer_small_makespan

        # Config i = (channel, interval, offset) in enumeration order.
        self.ch, self.iv, self.of, self.wt = [], [], [], []
        for c in range(self.m):
            for b in intervals:
                for delta in range(1, b + 1):
                    self.ch.append(c)
                    self.iv.append(b)
                    self.of.append(delta)
                    self.wt.append(self.lcm // b)
        self.n_configs = len(self.ch)
        self.full_mask = (1 << self.n_configs) - 1

        # cover[c][r]: configs a scan of channel c hits at slots with
        # (t-1) % lcm == r.
        self.cover = [[0] * self.lcm for _ in range(self.m)]
        for i in range(self.n_configs):
            b, delta = self.iv[i], self.of[i]
            for r in range(self.lcm):
                if r % b == delta - 1:
                    self.cover[self.ch[i]][r] |= 1 << i

        # Slot-demand lower bound bookkeeping: index and weight per interval.
        self.iv_index = {b: k for k, b in enumerate(intervals)}
        self.iv_weight = [self.lcm // b for b in intervals]
        self.n_iv = len(intervals)

        self.nodes = 0
        self.best_value: int | None = None
        self.best_makespan: int | None = None
        self.best_entries: dict[int, int] | None = None
        self.tt: dict[int, int] = {}
        self.tt_cap = 2_000_000
        self.node_limit: int | None = None
        self.deadline: float | None = None

    def seed_incumbent(self, schedule: ListeningSchedule) -> bool:
        try:
            span = makespan(schedule, self.model.intervals, self.m)
        except Exception:
            return False
        if span > self.t_max:
            return False
        times = discovery_times(schedule, self.model.intervals, self.m)
        value = sum(
            (self.lcm // kappa.interval) * t for kappa, t in times.items()
        )
        self.best_value = value
        self.best_makespan = span
        self.best_entries = {t: c for t, c in schedule.items() if t <= span}
        return True

    def run(self):
        undiscovered = list(range(self.n_configs))
        self._search(1, 0, 0, undiscovered, {}, 0, 0)
        return self

    def _bound(self, t: int, accrued: int, undiscovered: list[int]):
        """Admissible lower bound, or None when completion is impossible.

        Two relaxations, the max of which is returned:
        (a) every undiscovered configuration at its earliest future
            beaconing slot (ignores that slots carry one channel);
        (b) channel c still needs max_b(#undiscovered classes of (c, b))
            scans because one scan covers at most one class per interval;
            the j-th scan of c collects at most the summed weight of
            intervals with at least j classes left. Scan slots are globally
            distinct and >= t, so pairing those weight tokens, sorted
            descending, with slots t, t+1, ... ascending lower-bounds the
            weighted discovery sum (rearrangement inequality).
        A branch is dead when a configuration has no beaconing slot left in
        the horizon, or when the tokens outnumber the remaining slots.
        """
        est = accrued
        counts = [0] * (self.m * self.n_iv)
        for i in undiscovered:
            b = self.iv[i]
            nxt = t + (self.of[i] - t) % b
            if nxt > self.t_max:
                return None
            est += self.wt[i] * nxt
            counts[self.ch[i] * self.n_iv + self.iv_index[b]] += 1
        tokens: list[int] = []
        for c in range(self.m):
            base = c * self.n_iv
            needed = 0
            for k in range(self.n_iv):
                if counts[base + k] > needed:
                    needed = counts[base + k]
            if needed == 0:
                continue
            arr = [0] * needed
            for k in range(self.n_iv):
                w = self.iv_weight[k]
                for j in range(counts[base + k]):
                    arr[j] += w
            tokens.extend(arr)
        if tokens:
            if t + len(tokens) - 1 > self.t_max:
                return None
            tokens.sort(reverse=True)
            alt = accrued
            slot = t
            for w in tokens:
                alt += w * slot
                slot += 1
            if alt > est:
                est = alt
        return est

    def _prunes(self, bound_value: int) -> bool:
        if self.best_value is None:
            return False
        if self.prefer_small_makespan:
            return bound_value > self.best_value
        return bound_value >= self.best_value

    def _search(self, t, mask, accrued, undiscovered, entries, used_mask, span):
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise _NodeLimit
        if self.deadline is not None and self.nodes % 4096 == 0 and time.monotonic() > self.deadline:
            raise _NodeLimit
        if not undiscovered:
            better = self.best_value is None or accrued < self.best_value or (
                self.prefer_small_makespan
                and accrued == self.best_value
                and span < self.best_makespan
            )
            if better:
                self.best_value = accrued
                self.best_makespan = span
                self.best_entries = dict(entries)
            return
        if t > self.t_max:
            return
        key = mask * (self.t_max + 2) + t
        seen = self.tt.get(key)
        if seen is not None and seen <= accrued:
            if not (self.prefer_small_makespan and seen == accrued):
                return
        if seen is None or accrued < seen:
            if len(self.tt) < self.tt_cap or seen is not None:
                self.tt[key] = accrued

        r = (t - 1) % self.lcm
        # Channel symmetry: configurations are channel-symmetric, so among
        # never-used channels only the lowest needs to be branched on.
        lowest_fresh = None
        for c in range(self.m):
            if not used_mask >> c & 1:
                lowest_fresh = c
                break
        children = []
        for c in range(self.m):
            if not used_mask >> c & 1 and c != lowest_fresh:
                continue
            gain_mask = self.cover[c][r] & ~mask
            if gain_mask == 0:
                continue  # scanning with zero detections is dominated by idling
            children.append((gain_mask.bit_count(), -c, c, gain_mask))
        if not children:
            # Idling while a positive-detection scan exists is strictly
            # suboptimal (adding that scan lowers one discovery time), so
            # idle only as the forced move.
            bound_value = self._bound(t + 1, accrued, undiscovered)
            if bound_value is not None and not self._prunes(bound_value):
                self._search(t + 1, mask, accrued, undiscovered, entries, used_mask, span)
            return
        children.sort(reverse=True)
        for _, _, c, gain_mask in children:
            new_accrued = accrued
            still = []
            for i in undiscovered:
                if gain_mask >> i & 1:
                    new_accrued += self.wt[i] * t
                else:
                    still.append(i)
            bound_value = self._bound(t + 1, new_accrued, still) if still else new_accrued
            if bound_value is None or self._prunes(bound_value):
                continue
            entries[t] = c
            self._search(t + 1, mask | gain_mask, new_accrued, still, entries,
                         used_mask | (1 << c), t)
            del entries[t]


class _NodeLimit(Exception):
    pass


def solve_exact(
    model: GenoptModel,
    warm_start: ListeningSchedule | None = None,
    *,
    budget: int = DEFAULT_SOLVE_BUDGET,
    node_limit: int | None = None,
    time_limit: float | None = None,
    prefer_small_makespan: bool = False,
) -> SolveOutcome:
    """Prove the EMDT optimum over schedules confined to the model horizon."""
    if model.num_channels * model.t_max > budget:
        raise BudgetExceededError(
            f"|C|*t_max = {model.num_channels * model.t_max} exceeds the solve "
            f"budget {budget}; export the LP for an external solver instead"
        )
    searcher = _BranchAndBound(model, prefer_small_makespan)
    searcher.node_limit = node_limit
    if time_limit is not None:
        searcher.deadline = time.monotonic() + time_limit
    if warm_start is not None:
        searcher.seed_incumbent(warm_start)
    root_bound = searcher._bound(1, 0, list(range(searcher.n_configs)))
    limited = False
    try:
        searcher.run()
    except _NodeLimit:
        limited = True
    if searcher.best_entries is None:
        if limited:
            raise BudgetExceededError("search limit hit before any feasible schedule was found")
        return SolveOutcome(None, None, "infeasible", nodes=searcher.nodes,
                            horizon=model.t_max)
    schedule = ListeningSchedule(searcher.best_entries, num_channels=model.num_channels)
    objective = Fraction(searcher.best_value, searcher.scale)
    if limited:
        lower = Fraction(root_bound, searcher.scale) if root_bound is not None else None
        gap = None
        if lower is not None and objective > 0:
            gap = max(Fraction(0), (objective - lower) / objective)
        return SolveOutcome(schedule, objective, "bound-gap", gap=gap,
                            nodes=searcher.nodes, horizon=model.t_max)
    return SolveOutcome(schedule, objective, "proven-optimal",
                        nodes=searcher.nodes, horizon=model.t_max)


# ---------------------------------------------------------------------------
# Three-phase procedure with greedy warm starts
# ---------------------------------------------------------------------------


@dataclass
class GenoptOptions:
    """Knobs for the iterative horizon procedure.

    warm_runs defaults to 1000 for sets outside F2 and 50 inside it.
    Phases: 1 solves at the warm start's makespan, 2 at twice that,
    3 at LCM(B)*|C| (which proves the unconstrained optimum).
    """

    warm_runs: int | None = None
    seed: int = 0
    budget: int = DEFAULT_SOLVE_BUDGET
    node_limit: int | None = None
    time_limit: float | None = None
    phases: int = 3
    prefer_small_makespan: bool = False
    export_lp_path: str | None = None


def genopt(bis, channels, options: GenoptOptions | None = None) -> SolveOutcome:
    from .core import Family
    from .metrics import emdt as emdt_of

    bis = coerce_intervals(bis)
    m = channel_count(channels)
    opts = options or GenoptOptions()
    runs = opts.warm_runs
    if runs is None:
        runs = 50 if bis.in_family(Family.F2) else 1000

    warm = None
    warm_value = None
    for i in range(runs):
        candidate = greedy(bis, m, Tiebreak("rnd", opts.seed * 1_000_003 + i))
        value = emdt_of(candidate, bis, m)
        if warm_value is None or value < warm_value:
            warm, warm_value = candidate, value

    full_horizon = bis.lcm * m
    horizons: list[int] = []
    if warm is not None and opts.phases >= 1:
        h1 = makespan(warm, bis, m)
        horizons.append(h1)
        if opts.phases >= 2:
            horizons.append(min(2 * h1, full_horizon))
        if opts.phases >= 3:
            horizons.append(full_horizon)
    else:
        horizons.append(full_horizon)
    deduped = sorted(set(horizons))

    incumbent = warm
    outcome: SolveOutcome | None = None
    for horizon in deduped:
        model = build_model(bis, m, horizon)
        try:
            result = solve_exact(
                model,
                warm_start=incumbent,
                budget=opts.budget,
                node_limit=opts.node_limit,
                time_limit=opts.time_limit,
                prefer_small_makespan=opts.prefer_small_makespan,
            )
        except BudgetExceededError:
            if opts.export_lp_path:
                with open(opts.export_lp_path, "w") as fh:
                    fh.write(export_lp(model))
            if outcome is not None:
                return SolveOutcome(outcome.schedule, outcome.objective, "bound-gap",
                                    nodes=outcome.nodes, horizon=outcome.horizon)
            if incumbent is not None:
                return SolveOutcome(incumbent, warm_value, "bound-gap", horizon=horizon)
            raise
        assert result.status != "infeasible" or incumbent is None
        if result.schedule is not None:
            incumbent = result.schedule
        outcome = result
    assert outcome is not None
    if outcome.horizon < full_horizon and outcome.status == "proven-optimal":
        # Optimal for its horizon only; the unconstrained claim needs phase 3.
        return SolveOutcome(outcome.schedule, outcome.objective, "bound-gap",
                            nodes=outcome.nodes, horizon=outcome.horizon)
    return outcome
