"""Command-line interface.

Subcommands: schedule, metrics, genopt, oracle, simulate, sample, compare.
Exit codes: 0 success, 2 validation error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .core import classify
from .errors import BudgetExceededError, ValidationError
from .genopt import (
    GenoptOptions,
    build_model,
    decode,
    export_lp,
    genopt,
    import_solution,
    redundant_scans,
)
from .harness import ExperimentConfig, emit_reports, run_experiment
from .metrics import compute_metrics, schedule_from_json, schedule_to_json
from .oracle import OracleBudget, optimal_emdt, optimal_makespan, recursive_exists
from .sampling import SampleSpec, sample_f1, sample_f2
from .simulator import run_discovery, sample_environment
from .strategies import STRATEGY_NAMES, build_schedule


def _parse_intervals(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse intervals {text!r}: {exc}") from exc


def _write_out(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _schedule_json(witness, bis, channels) -> str:
    return schedule_to_json(witness, bis, channels) if witness is not None else "null"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaconscan",
        description="Listening schedules for passive multi-channel beacon discovery",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", default=None, help="write output to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="construct a listening schedule")
    p.add_argument("--strategy", required=True, choices=STRATEGY_NAMES)
    p.add_argument("--intervals", required=True, help="comma separated, e.g. 1,2,4")
    p.add_argument("--channels", required=True, type=int)

    p = sub.add_parser("metrics", help="evaluate a schedule JSON file")
    p.add_argument("--schedule", required=True, help="path to schedule JSON")

    p = sub.add_parser("genopt", help="solve the EMDT program")
    p.add_argument("--intervals", required=True)
    p.add_argument("--channels", required=True, type=int)
    p.add_argument("--phases", type=int, default=3)
    p.add_argument("--warm-runs", type=int, default=None)
    p.add_argument("--budget", type=int, default=None, help="guard on |C|*t_max")
    p.add_argument("--export-lp", default=None, metavar="PATH")
    p.add_argument("--import-sol", default=None, metavar="PATH")
    p.add_argument("--horizon", type=int, default=None,
                   help="model horizon for --export-lp/--import-sol")

    p = sub.add_parser("oracle", help="brute-force ground truth for small instances")
    p.add_argument("what", choices=("emdt", "makespan", "recursive"))
    p.add_argument("--intervals", required=True)
    p.add_argument("--channels", required=True, type=int)
    p.add_argument("--max-slots", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None)

    p = sub.add_parser("simulate", help="Monte Carlo discovery runs")
    p.add_argument("--schedule", required=True, help="path to schedule JSON")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--networks", type=int, default=10)

    p = sub.add_parser("sample", help="generate interval sets")
    p.add_argument("family", choices=("f1", "f2"))
    p.add_argument("--count", type=int, default=10, help="F1 only")
    p.add_argument("--interval-max", type=int, default=10, help="F1 interval upper bound")
    p.add_argument("--number-max", type=int, default=256, help="F2 base number upper bound")

    p = sub.add_parser("compare", help="run the strategy comparison experiment")
    p.add_argument("--strategies", default="psv,greedy-dtr,greedy-rnd,chan-train")
    p.add_argument("--channels", default="2,3,4,5,6", help="comma separated counts")
    p.add_argument("--source", choices=("f1", "f2", "explicit"), default="f2")
    p.add_argument("--bi-sets", default=None,
                   help="semicolon separated interval lists for --source explicit")
    p.add_argument("--sets", type=int, default=20, help="interval sets per point")
    p.add_argument("--f2-number-max", type=int, default=64)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    return parser


def _cmd_schedule(args) -> str:
    bis = classify(_parse_intervals(args.intervals))
    schedule = build_schedule(args.strategy, bis, args.channels, seed=args.seed)
    return schedule_to_json(schedule, bis, args.channels)


def _cmd_metrics(args) -> str:
    with open(args.schedule) as fh:
        schedule, bis, channels = schedule_from_json(fh.read())
    report = compute_metrics(schedule, bis, channels)
    return report.to_csv() if args.format == "csv" else report.to_json()


def _cmd_genopt(args) -> str:
    bis = classify(_parse_intervals(args.intervals))
    if args.import_sol:
        if args.horizon is None:
            raise ValidationError("--import-sol needs --horizon to rebuild the model")
        model = build_model(bis, args.channels, args.horizon)
        with open(args.import_sol) as fh:
            assignment = import_solution(fh.read())
        schedule = decode(model, assignment)
        report = compute_metrics(schedule, bis, args.channels)
        return json.dumps({
            "status": "imported",
            "objective_num": report.emdt.numerator,
            "objective_den": report.emdt.denominator,
            "redundant_slots": redundant_scans(model, assignment),
            "schedule": json.loads(schedule_to_json(schedule, bis, args.channels)),
        })
    if args.export_lp and args.horizon is not None:
        model = build_model(bis, args.channels, args.horizon)
        with open(args.export_lp, "w") as fh:
            fh.write(export_lp(model))
        return json.dumps({"status": "exported", "path": args.export_lp,
                           "horizon": args.horizon})
    options = GenoptOptions(
        warm_runs=args.warm_runs,
        seed=args.seed,
        phases=args.phases,
        export_lp_path=args.export_lp,
    )
    if args.budget is not None:
        options.budget = args.budget
    outcome = genopt(bis, args.channels, options)
    return json.dumps({
        "status": outcome.status,
        "objective_num": outcome.objective.numerator if outcome.objective else None,
        "objective_den": outcome.objective.denominator if outcome.objective else None,
        "gap": None if outcome.gap is None else float(outcome.gap),
        "nodes": outcome.nodes,
        "horizon": outcome.horizon,
        "schedule": None if outcome.schedule is None else json.loads(
            schedule_to_json(outcome.schedule, bis, args.channels)),
    })


def _cmd_oracle(args) -> str:
    bis = classify(_parse_intervals(args.intervals))
    kwargs = {}
    if args.max_slots is not None:
        kwargs["max_slots"] = args.max_slots
    if args.max_nodes is not None:
        kwargs["max_nodes"] = args.max_nodes
    budget = OracleBudget(**kwargs) if kwargs else None
    if args.what == "emdt":
        result = optimal_emdt(bis, args.channels, budget)
        value = {"num": result.value.numerator, "den": result.value.denominator}
    elif args.what == "makespan":
        result = optimal_makespan(bis, args.channels, budget)
        value = result.value
    else:
        result = recursive_exists(bis, args.channels, budget)
        value = result.value
    return json.dumps({
        "value": value,
        "witness": None if result.witness is None else json.loads(
            _schedule_json(result.witness, bis, args.channels)),
        "nodes": result.nodes,
        "status": "ok",
    })


def _cmd_simulate(args) -> str:
    with open(args.schedule) as fh:
        schedule, bis, channels = schedule_from_json(fh.read())
    lines = ["trial,seed,mdt_num,mdt_den"]
    for r in range(args.trials):
        trial_seed = f"{args.seed}:{r}"
        env = sample_environment(bis, channels, args.networks, trial_seed)
        result = run_discovery(schedule, env, seed=trial_seed)
        if result.mdt is None:
            lines.append(f"{r},{trial_seed},NA,NA")
        else:
            lines.append(f"{r},{trial_seed},{result.mdt.numerator},{result.mdt.denominator}")
    return "\n".join(lines) + "\n"


def _cmd_sample(args) -> str:
    if args.family == "f1":
        spec = SampleSpec(family="F1", seed=args.seed,
                          f1_interval_range=(1, args.interval_max))
        sets = sample_f1(spec, args.count)
    else:
        spec = SampleSpec(family="F2", f2_numbers=(1, args.number_max))
        sets = sample_f2(spec)
    return "\n".join(b.to_json() for b in sets) + "\n"


def _cmd_compare(args) -> str:
    bi_sets = ()
    if args.bi_sets:
        bi_sets = tuple(tuple(_parse_intervals(part)) for part in args.bi_sets.split(";"))
    config = ExperimentConfig(
        strategies=tuple(s.strip() for s in args.strategies.split(",") if s.strip()),
        channel_counts=tuple(int(c) for c in args.channels.split(",")),
        source=args.source,
        bi_sets=bi_sets,
        sets_per_point=args.sets,
        seed=args.seed,
        f2_number_range=(1, args.f2_number_max),
        jobs=args.jobs,
    )
    rows = run_experiment(config)
    paths = emit_reports(rows, args.out_dir)
    return json.dumps({"rows": len(rows), "reports": [str(p) for p in paths]})


_HANDLERS = {
    "schedule": _cmd_schedule,
    "metrics": _cmd_metrics,
    "genopt": _cmd_genopt,
    "oracle": _cmd_oracle,
    "simulate": _cmd_simulate,
    "sample": _cmd_sample,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        output = _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    _write_out(output, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
