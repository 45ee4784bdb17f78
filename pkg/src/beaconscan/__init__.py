"""Listening schedules for asynchronous passive multi-channel discovery of
beacon-enabled networks: constructors, exact metrics, an exact EMDT solver,
brute-force oracles, a discrete-time simulator and an experiment harness."""

from .core import (
    BeaconIntervalSet,
    ChannelSet,
    Environment,
    Family,
    NetworkConfiguration,
    Rational,
    beacon_offset_at,
    classify,
    enumerate_configurations,
    normalize_gcd,
)
from .errors import BudgetExceededError, IncompleteScheduleError, ValidationError
from .genopt import (
    GenoptModel,
    GenoptOptions,
    SolveOutcome,
    build_model,
    decode,
    export_lp,
    genopt,
    import_solution,
    solve_exact,
)
from .metrics import (
    ListeningSchedule,
    MetricsReport,
    active_idle_counts,
    channel_switches,
    compute_metrics,
    discovery_times,
    emdt,
    is_complete,
    is_recursive,
    makespan,
    mdt,
    repair_to_lcm_bound,
    schedule_from_json,
    schedule_to_json,
    undiscovered_configurations,
)
from .oracle import OracleBudget, OracleResult, optimal_emdt, optimal_makespan, recursive_exists
from .sampling import SampleSpec, f1_space, sample_f1, sample_f2
from .simulator import (
    SimulationResult,
    complete_environment,
    monte_carlo_emdt,
    proportional_environment,
    run_discovery,
    sample_environment,
)
from .strategies import (
    STRATEGY_NAMES,
    DiscoveryState,
    Tiebreak,
    build_schedule,
    chan_train,
    greedy,
    new_detections,
    opt_b2,
    psv,
)

__version__ = "0.1.0"
