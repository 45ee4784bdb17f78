"""Discrete-time execution of schedules against network environments.

Idealized conditions: channel switches are instantaneous, beacons take no
time to transmit and are never lost. A network is discovered at the first
slot that is both in its beacon schedule and scanned on its channel.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

from .core import (
    Environment,
    NetworkConfiguration,
    channel_count,
    coerce_intervals,
    enumerate_configurations,
)
from .errors import ValidationError
from .metrics import ListeningSchedule, is_complete


@dataclass(frozen=True)
class SimulationResult:
    """Per-network discovery slots for one environment run.

    `mdt` is the plain mean of discovery slots, defined only when every
    network was discovered; undiscovered networks carry None.
    """

    discovery: dict[int, int | None]
    mdt: Fraction | None
    seed: object = None


def complete_environment(bis, channels) -> Environment:
    """One network per possible configuration, ids in enumeration order."""
    configs = enumerate_configurations(bis, channels)
    return Environment(tuple(enumerate(configs)))


def proportional_environment(bis, channels) -> Environment:
    """LCM(B)/b networks per configuration with interval b.

    Network shares then equal the uniform-use probabilities
    p = 1/(b|B||C|), so the plain-mean MDT of this environment equals the
    EMDT of any complete schedule exactly.
    """
    bis = coerce_intervals(bis)
    networks = []
    for kappa in enumerate_configurations(bis, channels):
        for _ in range(bis.lcm // kappa.interval):
            networks.append((len(networks), kappa))
    return Environment(tuple(networks))


def sample_environment(bis, channels, n: int, seed) -> Environment:
    """n networks drawn i.i.d.: uniform channel, uniform interval, uniform offset."""
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    if n < 0:
        raise ValidationError(f"network count must be >= 0, got {n}")
    rng = random.Random(f"env:{seed}")
    networks = []
    for i in range(n):
        b = rng.choice(bis.intervals)
        kappa = NetworkConfiguration(rng.randrange(m), b, rng.randint(1, b))
        networks.append((i, kappa))
    return Environment(tuple(networks))


def run_discovery(schedule: ListeningSchedule, environment: Environment,
                  seed=None) -> SimulationResult:
    """Execute the schedule slot by slot against one environment."""
    discovery: dict[int, int | None] = {}
    for nid, kappa in environment.networks:
        found = None
        for t, c in schedule.items():
            if c == kappa.channel and kappa.beacons_in(t):
                found = t
                break
        discovery[nid] = found
    mdt = None
    if environment.networks and all(v is not None for v in discovery.values()):
        mdt = Fraction(sum(discovery.values()), len(discovery))
    return SimulationResult(discovery, mdt, seed)


def monte_carlo_emdt(schedule: ListeningSchedule, bis, channels, trials: int,
                     networks_per_trial: int = 10, seed=0) -> tuple[float, float]:
    """Mean of per-trial MDTs over sampled environments, with a 95% half-width.

    Requires a complete schedule so every sampled network is discoverable.
    Trial r uses the independent stream (seed, r).
    """
    bis = coerce_intervals(bis)
    m = channel_count(channels)
    if trials < 2:
        raise ValidationError("need at least 2 trials for a confidence interval")
    if networks_per_trial < 1:
        raise ValidationError("need at least one network per trial")
    if not is_complete(schedule, bis, m):
        raise ValidationError("schedule must be complete for Monte Carlo estimation")
    values = []
    for r in range(trials):
        env = sample_environment(bis, m, networks_per_trial, f"{seed}:{r}")
        result = run_discovery(schedule, env, seed=f"{seed}:{r}")
        values.append(float(result.mdt))
    mean = sum(values) / trials
    variance = sum((v - mean) ** 2 for v in values) / (trials - 1)
    z = NormalDist().inv_cdf(0.975)
    half_width = z * math.sqrt(variance / trials)
    return mean, half_width
