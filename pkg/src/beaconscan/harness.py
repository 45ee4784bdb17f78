"""Experiment runner: normalized strategy comparisons at desk scale.

Every cell is one (strategy, channel count, interval set). EMDT is
normalized by the genopt objective for that instance (status recorded;
with a proven optimum the ratio is >= 1 by construction), switches by
|C|-1, makespan and active slots by max(B)*|C|.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from scipy.stats import t as student_t

from .core import BeaconIntervalSet, coerce_intervals
from .genopt import DEFAULT_SOLVE_BUDGET, GenoptOptions, genopt
from .metrics import compute_metrics, is_complete
from .sampling import SampleSpec, sample_f1, sample_f2
from .strategies import STRATEGY_NAMES, build_schedule
from .errors import ValidationError


@dataclass(frozen=True)
class ExperimentConfig:
    strategies: tuple[str, ...]
    channel_counts: tuple[int, ...] = (2, 3, 4, 5, 6)
    source: str = "f2"  # "f1" | "f2" | "explicit"
    bi_sets: tuple[tuple[int, ...], ...] = ()
    sets_per_point: int = 20
    seed: int = 0
    solve_budget: int = DEFAULT_SOLVE_BUDGET
    f1_interval_range: tuple[int, int] = (1, 10)
    f2_number_range: tuple[int, int] = (1, 64)
    jobs: int = 1

    def __post_init__(self):
        if not self.strategies:
            raise ValidationError("need at least one strategy")
        unknown = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if unknown:
            raise ValidationError(f"unknown strategies {unknown}; expected {STRATEGY_NAMES}")
        if self.sets_per_point < 1:
            raise ValidationError("sets_per_point must be >= 1")
        if self.source not in ("f1", "f2", "explicit"):
            raise ValidationError("source must be 'f1', 'f2' or 'explicit'")
        if self.source == "explicit" and not self.bi_sets:
            raise ValidationError("explicit source needs bi_sets")


@dataclass(frozen=True)
class ComparisonRow:
    strategy: str
    channels: int
    bi_set: str
    emdt: Fraction | None = None
    emdt_norm: float | None = None
    makespan: int | None = None
    makespan_norm: float | None = None
    switches: int | None = None
    switches_norm: float | None = None
    active: int | None = None
    active_norm: float | None = None
    bound_status: str = ""
    error: str | None = None


CSV_COLUMNS = (
    "strategy,channels,bi_set,emdt_num,emdt_den,emdt_norm,makespan,makespan_norm,"
    "switches,switches_norm,active,active_norm"
)


def _pick_sets(config: ExperimentConfig, channels: int) -> list[BeaconIntervalSet]:
    if config.source == "explicit":
        return [coerce_intervals(s) for s in config.bi_sets]
    if config.source == "f1":
        spec = SampleSpec(family="F1", seed=config.seed * 1009 + channels,
                          f1_interval_range=config.f1_interval_range)
        return sample_f1(spec, config.sets_per_point)
    spec = SampleSpec(family="F2", f2_numbers=config.f2_number_range)
    universe = sample_f2(spec)
    if len(universe) <= config.sets_per_point:
        return universe
    rng = random.Random(f"pick-f2:{config.seed}:{channels}")
    return rng.sample(universe, config.sets_per_point)


def _evaluate_group(args) -> list[ComparisonRow]:
    """All strategy rows for one (interval set, channel count) cell group."""
    intervals, channels, strategies, seed, solve_budget = args
    bis = coerce_intervals(intervals)
    label = "-".join(map(str, bis.intervals))
    rows: list[ComparisonRow] = []
    try:
        bound = genopt(bis, channels, GenoptOptions(seed=seed, budget=solve_budget))
        bound_emdt = bound.objective
        bound_status = bound.status
    except Exception as exc:  # noqa: BLE001 - per-cell failures are recorded
        return [ComparisonRow(s, channels, label, error=f"bound: {exc}") for s in strategies]
    span_floor = bis.max * channels
    for strategy in strategies:
        try:
            schedule = build_schedule(strategy, bis, channels, seed=seed)
            if not is_complete(schedule, bis, channels):
                raise ValidationError("constructed schedule is not complete")
            report = compute_metrics(schedule, bis, channels)
            emdt_norm = float(report.emdt / bound_emdt)
            if bound_status == "proven-optimal" and report.emdt < bound_emdt:
                raise AssertionError(
                    f"strategy beat a proven optimum: {report.emdt} < {bound_emdt}"
                )
            rows.append(ComparisonRow(
                strategy=strategy,
                channels=channels,
                bi_set=label,
                emdt=report.emdt,
                emdt_norm=emdt_norm,
                makespan=report.makespan,
                makespan_norm=report.makespan / span_floor,
                switches=report.channel_switches,
                switches_norm=(report.channel_switches / (channels - 1)
                               if channels > 1 else None),
                active=report.active_slots,
                active_norm=report.active_slots / span_floor,
                bound_status=bound_status,
            ))
        except Exception as exc:  # noqa: BLE001
            rows.append(ComparisonRow(strategy, channels, label, error=str(exc)))
    return rows


def run_experiment(config: ExperimentConfig) -> list[ComparisonRow]:
    groups = []
    for channels in config.channel_counts:
        for bis in _pick_sets(config, channels):
            groups.append((bis.intervals, channels, config.strategies,
                           config.seed, config.solve_budget))
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            nested = list(pool.map(_evaluate_group, groups))
    else:
        nested = [_evaluate_group(g) for g in groups]
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r.strategy, r.channels, r.bi_set))
    return rows


@dataclass(frozen=True)
class SummaryPoint:
    strategy: str
    channels: int
    metric: str
    mean: float
    ci_halfwidth: float
    cells: int


_METRIC_FIELDS = ("emdt_norm", "makespan_norm", "switches_norm", "active_norm")


def aggregate_rows(rows: list[ComparisonRow]) -> list[SummaryPoint]:
    """Per (strategy, |C|, metric) mean with a 95% Student-t half-width."""
    buckets: dict[tuple[str, int, str], list[float]] = {}
    for row in rows:
        if row.error is not None:
            continue
        for metric in _METRIC_FIELDS:
            value = getattr(row, metric)
            if value is not None:
                buckets.setdefault((row.strategy, row.channels, metric), []).append(value)
    points = []
    for (strategy, channels, metric), values in sorted(buckets.items()):
        n = len(values)
        mean = sum(values) / n
        if n > 1:
            variance = sum((v - mean) ** 2 for v in values) / (n - 1)
            half = float(student_t.ppf(0.975, n - 1)) * (variance / n) ** 0.5
        else:
            half = float("nan")
        points.append(SummaryPoint(strategy, channels, metric, mean, half, n))
    return points


def emit_reports(rows: list[ComparisonRow], out_dir) -> list[Path]:
    """Write cells.csv, summary.json and plot_data.json under out_dir."""
    if not rows:
        raise ValidationError("nothing to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells_path = out / "cells.csv"
    lines = [CSV_COLUMNS]
    for r in rows:
        if r.error is not None:
            continue
        lines.append(
            f"{r.strategy},{r.channels},{r.bi_set},{r.emdt.numerator},"
            f"{r.emdt.denominator},{r.emdt_norm!r},{r.makespan},{r.makespan_norm!r},"
            f"{r.switches},{'' if r.switches_norm is None else repr(r.switches_norm)},"
            f"{r.active},{r.active_norm!r}"
        )
    cells_path.write_text("\n".join(lines) + "\n")

    points = aggregate_rows(rows)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps({
        "points": [p.__dict__ for p in points],
        "errors": [
            {"strategy": r.strategy, "channels": r.channels, "bi_set": r.bi_set,
             "error": r.error}
            for r in rows if r.error is not None
        ],
    }, indent=2))

    plot_path = out / "plot_data.json"
    strategies = sorted({p.strategy for p in points})
    plot = {}
    for metric in _METRIC_FIELDS:
        series = []
        for strategy in strategies:
            mine = [p for p in points if p.strategy == strategy and p.metric == metric]
            mine.sort(key=lambda p: p.channels)
            if mine:
                series.append({
                    "strategy": strategy,
                    "channels": [p.channels for p in mine],
                    "mean": [p.mean for p in mine],
                    "ci": [p.ci_halfwidth for p in mine],
                })
        plot[metric] = series
    plot_path.write_text(json.dumps(plot, indent=2))
    return [cells_path, summary_path, plot_path]
