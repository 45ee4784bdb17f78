import random
from fractions import Fraction

import pytest

from beaconscan import (
    IncompleteScheduleError,
    ListeningSchedule,
    NetworkConfiguration,
    ValidationError,
    active_idle_counts,
    channel_switches,
    classify,
    compute_metrics,
    complete_environment,
    discovery_times,
    emdt,
    is_complete,
    is_recursive,
    makespan,
    mdt,
    proportional_environment,
    psv,
    repair_to_lcm_bound,
    schedule_from_json,
    schedule_to_json,
    undiscovered_configurations,
)

B12 = classify([1, 2])
OPTIMAL_12 = ListeningSchedule({1: 0, 2: 1, 3: 1, 4: 0})


def random_complete_schedule(bis, channels, rng, idle_prob=0.35):
    """Random scans up to the LCM(B)*|C| horizon, then dedicated tail scans
    for anything still missing (so the result may exceed the horizon)."""
    bis = classify(bis) if not hasattr(bis, "intervals") else bis
    entries = {}
    for t in range(1, bis.lcm * channels + 1):
        if rng.random() >= idle_prob:
            entries[t] = rng.randrange(channels)
    schedule = ListeningSchedule(entries)
    missing = undiscovered_configurations(schedule, bis, channels)
    last = max(entries) if entries else 0
    for kappa in missing:
        t = kappa.first_beacon_at_or_after(last + 1)
        while t in entries:
            t += kappa.interval
        entries[t] = kappa.channel
        last = max(last, t)
    out = ListeningSchedule(entries)
    assert is_complete(out, bis, channels)
    return out


class TestScheduleType:
    def test_one_channel_per_slot(self):
        with pytest.raises(ValidationError):
            ListeningSchedule([(1, 0), (1, 1)])

    def test_channel_bound_checked_when_known(self):
        with pytest.raises(ValidationError):
            ListeningSchedule({1: 2}, num_channels=2)

    def test_json_round_trip(self):
        text = schedule_to_json(OPTIMAL_12, B12, 2)
        schedule, bis, channels = schedule_from_json(text)
        assert schedule == OPTIMAL_12 and bis == B12 and channels == 2

    def test_json_slots_strictly_increasing(self):
        bad = '{"channels": 1, "intervals": [1], "entries": [{"slot": 2, "channel": 0}, {"slot": 2, "channel": 0}]}'
        with pytest.raises(ValidationError):
            schedule_from_json(bad)


class TestDiscoveryTimes:
    def test_single_slot(self):
        times = discovery_times(ListeningSchedule({1: 0}), [1], 1)
        assert times == {NetworkConfiguration(0, 1, 1): 1}

    def test_optimal_schedule_times(self):
        times = discovery_times(OPTIMAL_12, B12, 2)
        assert times == {
            NetworkConfiguration(0, 1, 1): 1,
            NetworkConfiguration(0, 2, 1): 1,
            NetworkConfiguration(0, 2, 2): 4,
            NetworkConfiguration(1, 1, 1): 2,
            NetworkConfiguration(1, 2, 1): 3,
            NetworkConfiguration(1, 2, 2): 2,
        }

    def test_uncovered_configuration_absent(self):
        times = discovery_times(ListeningSchedule({1: 0, 2: 0}), B12, 2)
        assert NetworkConfiguration(1, 1, 1) not in times
        missing = undiscovered_configurations(ListeningSchedule({1: 0, 2: 0}), B12, 2)
        assert all(k.channel == 1 for k in missing) and len(missing) == 3


class TestIsComplete:
    def test_psv_complete(self):
        assert is_complete(psv(B12, 2), B12, 2)

    def test_empty_incomplete(self):
        assert not is_complete(ListeningSchedule({}), B12, 2)

    def test_single_channel_only(self):
        assert not is_complete(ListeningSchedule({1: 0, 2: 0}), B12, 2)


class TestEmdt:
    def test_psv_value(self):
        assert emdt(psv(B12, 2), B12, 2) == Fraction(9, 4)

    def test_optimal_value(self):
        assert emdt(OPTIMAL_12, B12, 2) == 2

    @pytest.mark.parametrize("b", [1, 2, 3, 5, 8])
    def test_single_interval_sweep(self, b):
        # Oracle by direct summation: offset class d is found at slot d, each
        # weighted 1/b, and the |B||C| normalizer is 1 here.
        schedule = ListeningSchedule({t: 0 for t in range(1, b + 1)})
        direct = sum(Fraction(d, b) for d in range(1, b + 1))
        assert emdt(schedule, [b], 1) == direct == Fraction(b + 1, 2)

    def test_rejects_incomplete(self):
        with pytest.raises(IncompleteScheduleError):
            emdt(ListeningSchedule({1: 0}), B12, 2)


class TestMdt:
    def test_proportional_environment_matches_emdt(self):
        assert mdt(OPTIMAL_12, proportional_environment(B12, 2)) == 2

    def test_complete_environment_plain_mean(self):
        # One network per configuration: the mean of {1,1,4,2,3,2}.
        assert mdt(OPTIMAL_12, complete_environment(B12, 2)) == Fraction(13, 6)

    def test_single_network(self):
        from beaconscan import Environment

        env = Environment(((0, NetworkConfiguration(0, 1, 1)),))
        assert mdt(ListeningSchedule({1: 0}), env) == 1

    def test_shared_configuration(self):
        from beaconscan import Environment

        kappa = NetworkConfiguration(0, 2, 1)
        env = Environment(((0, kappa), (1, kappa)))
        schedule = ListeningSchedule({3: 0})
        assert mdt(schedule, env) == 3

    def test_rejects_undiscovered_network(self):
        from beaconscan import Environment

        env = Environment(((0, NetworkConfiguration(1, 1, 1)),))
        with pytest.raises(IncompleteScheduleError):
            mdt(ListeningSchedule({1: 0}), env)

    def test_equals_emdt_on_proportional_environment_for_random_schedules(self):
        rng = random.Random(42)
        for _ in range(40):
            bis = classify(rng.sample(range(1, 7), rng.randint(1, 3)))
            channels = rng.randint(1, 3)
            schedule = random_complete_schedule(bis, channels, rng)
            env = proportional_environment(bis, channels)
            assert mdt(schedule, env) == emdt(schedule, bis, channels)


class TestMakespan:
    def test_psv_hits_lower_bound(self):
        for intervals, channels in ([1, 2], 2), ([2, 3, 4, 6, 12], 2), ([3], 4):
            bis = classify(intervals)
            assert makespan(psv(bis, channels), bis, channels) == bis.max * channels

    def test_rejects_incomplete(self):
        with pytest.raises(IncompleteScheduleError):
            makespan(ListeningSchedule({1: 0}), B12, 2)

    def test_lower_bound_on_random_schedules(self):
        rng = random.Random(7)
        for _ in range(30):
            bis = classify(rng.sample(range(1, 8), rng.randint(1, 3)))
            channels = rng.randint(1, 3)
            schedule = random_complete_schedule(bis, channels, rng)
            assert makespan(schedule, bis, channels) >= bis.max * channels

    def test_earliest_full_offset_class_bound(self):
        # For each (b, delta), all |C| same-offset configurations cannot all
        # be discovered before slot b*(|C|-1) + delta.
        rng = random.Random(13)
        for _ in range(30):
            bis = classify(rng.sample(range(1, 7), rng.randint(1, 3)))
            channels = rng.randint(1, 3)
            schedule = random_complete_schedule(bis, channels, rng)
            times = discovery_times(schedule, bis, channels)
            for b in bis.intervals:
                for delta in range(1, b + 1):
                    latest = max(times[NetworkConfiguration(c, b, delta)]
                                 for c in range(channels))
                    assert latest >= b * (channels - 1) + delta


class TestChannelSwitches:
    def test_psv_three_channels(self):
        assert channel_switches(psv(classify([2]), 3)) == 2

    def test_alternating(self):
        assert channel_switches(ListeningSchedule({1: 0, 2: 1, 3: 0, 4: 1})) == 3

    def test_single_channel(self):
        assert channel_switches(ListeningSchedule({1: 0, 5: 0})) == 0

    def test_idle_gap_keeps_tuned_channel(self):
        assert channel_switches(ListeningSchedule({1: 0, 3: 0, 4: 1})) == 1


class TestActiveIdle:
    def test_psv_has_no_idle(self):
        bis = classify([1, 2, 4])
        active, idle = active_idle_counts(psv(bis, 3), bis, 3)
        assert (active, idle) == (12, 0)

    def test_schedule_with_idle_slot(self):
        # EMDT-optimal schedule for B={2,3,4}, |C|=2 with an idle slot at 9.
        bis = classify([2, 3, 4])
        schedule = ListeningSchedule({1: 1, 2: 1, 6: 1, 7: 1, 8: 1, 3: 0, 4: 0, 5: 0, 10: 0})
        assert emdt(schedule, bis, 2) == Fraction(11, 3)
        active, idle = active_idle_counts(schedule, bis, 2)
        assert idle >= 1 and (active, idle) == (9, 1)

    def test_sum_is_makespan(self):
        rng = random.Random(5)
        for _ in range(20):
            bis = classify(rng.sample(range(1, 7), rng.randint(1, 3)))
            channels = rng.randint(1, 3)
            schedule = random_complete_schedule(bis, channels, rng)
            active, idle = active_idle_counts(schedule, bis, channels)
            assert active + idle == makespan(schedule, bis, channels)


class TestIsRecursive:
    def test_psv_not_recursive_for_two_intervals(self):
        assert not is_recursive(psv(B12, 2), B12, 2)

    def test_unscanned_slot_breaks_it(self):
        assert not is_recursive(ListeningSchedule({1: 0, 3: 1, 4: 1}), B12, 2)

    def test_known_recursive_schedule(self):
        assert is_recursive(OPTIMAL_12, B12, 2)

    def test_recursive_implies_complete_and_makespan_optimal(self):
        rng = random.Random(99)
        found = 0
        for _ in range(200):
            bis = classify(rng.sample(range(1, 5), rng.randint(1, 2)))
            channels = rng.randint(1, 2)
            schedule = random_complete_schedule(bis, channels, rng, idle_prob=0.0)
            if is_recursive(schedule, bis, channels):
                found += 1
                assert makespan(schedule, bis, channels) == bis.max * channels
        assert found  # the generator does stumble on recursive schedules


class TestRepair:
    def test_within_bound_unchanged(self):
        assert repair_to_lcm_bound(OPTIMAL_12, B12, 2) == OPTIMAL_12

    def test_contract_example(self):
        late = ListeningSchedule({1: 0, 2: 1, 3: 1, 6: 0})
        before = discovery_times(late, B12, 2)
        repaired = repair_to_lcm_bound(late, B12, 2)
        after = discovery_times(repaired, B12, 2)
        assert after[NetworkConfiguration(0, 2, 2)] == 4
        for kappa, t in before.items():
            if kappa != NetworkConfiguration(0, 2, 2):
                assert after[kappa] == t

    def test_co_discovery_does_not_break_repair(self):
        # Slot 11 first-discovers both (2,1) and (3,2) on the only channel;
        # naively moving it into slot 1 would lose (3,2).
        bis = classify([2, 3])
        schedule = ListeningSchedule({4: 0, 6: 0, 10: 0, 11: 0})
        before = discovery_times(schedule, bis, 1)
        repaired = repair_to_lcm_bound(schedule, bis, 1)
        after = discovery_times(repaired, bis, 1)
        assert makespan(repaired, bis, 1) <= 6
        assert all(after[k] <= before[k] for k in before)

    def test_random_schedules_pointwise_and_bounded(self):
        rng = random.Random(2024)
        for _ in range(60):
            bis = classify(rng.sample(range(1, 7), rng.randint(1, 3)))
            channels = rng.randint(1, 3)
            schedule = random_complete_schedule(bis, channels, rng)
            before = discovery_times(schedule, bis, channels)
            repaired = repair_to_lcm_bound(schedule, bis, channels)
            after = discovery_times(repaired, bis, channels)
            assert makespan(repaired, bis, channels) <= bis.lcm * channels
            assert all(after[k] <= before[k] for k in before)
            assert emdt(repaired, bis, channels) <= emdt(schedule, bis, channels)


class TestMetricsReport:
    def test_csv_shape(self):
        report = compute_metrics(psv(B12, 2), B12, 2)
        assert report.to_csv() == "makespan,emdt_num,emdt_den,switches,active,idle\n4,9,4,1,4,0\n"

    def test_json_fields(self):
        import json

        report = compute_metrics(OPTIMAL_12, B12, 2)
        data = json.loads(report.to_json())
        assert data["makespan"] == 4
        assert (data["emdt_num"], data["emdt_den"]) == (2, 1)
        assert data["active"] == 4 and data["idle"] == 0
        assert len(data["discovery_times"]) == 6
