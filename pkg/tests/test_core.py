import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beaconscan import (
    BeaconIntervalSet,
    ChannelSet,
    Family,
    NetworkConfiguration,
    ValidationError,
    beacon_offset_at,
    classify,
    enumerate_configurations,
    normalize_gcd,
)


def brute_force_offset(t, b):
    # Independent oracle: enumerate beacon trains {delta + i*b} and find the
    # one containing t.
    for delta in range(1, b + 1):
        if t in {delta + i * b for i in range((t // b) + 1)}:
            return delta
    raise AssertionError


class TestBeaconOffsetAt:
    def test_offset_one_networks_beacon_in_slot_one(self):
        assert beacon_offset_at(1, 2) == 1

    def test_slot_four_interval_two(self):
        assert beacon_offset_at(4, 2) == 2  # 2 + 1*2 = 4

    def test_slot_seven_interval_three_matches_enumeration(self):
        assert beacon_offset_at(7, 3) == brute_force_offset(7, 3) == 1

    @pytest.mark.parametrize("t,b", [(0, 1), (-3, 2), (1, 0), (5, -1)])
    def test_rejects_bad_inputs(self, t, b):
        with pytest.raises(ValidationError):
            beacon_offset_at(t, b)

    @given(st.integers(1, 500), st.integers(1, 40))
    def test_matches_brute_force(self, t, b):
        assert beacon_offset_at(t, b) == brute_force_offset(t, b)

    @given(st.integers(1, 500), st.integers(1, 40))
    def test_periodicity_b(self, t, b):
        assert beacon_offset_at(t, b) == beacon_offset_at(t + b, b)

    @given(st.sets(st.integers(1, 12), min_size=1, max_size=4), st.integers(1, 30))
    def test_offset_vector_has_period_lcm(self, intervals, t):
        bis = classify(intervals)
        vec = lambda s: tuple(beacon_offset_at(s, b) for b in bis.intervals)
        assert vec(t) == vec(t + bis.lcm)

    def test_configuration_beacons_at_its_offset_class_slots(self):
        kappa = NetworkConfiguration(0, 3, 2)
        slots = [t for t in range(1, 20) if kappa.beacons_in(t)]
        assert slots == [2, 5, 8, 11, 14, 17]
        assert all(beacon_offset_at(t, 3) == 2 for t in slots)


class TestClassify:
    def test_powers_of_two(self):
        assert classify([1, 2, 4]).family == Family.F4

    def test_f2_not_f3(self):
        b = classify([2, 3, 4, 6, 12])
        assert b.family == Family.F2
        assert b.in_family(Family.F2) and not b.in_family(Family.F3)

    def test_f1_only(self):
        b = classify([1, 2, 3, 5])
        assert b.family == Family.F1
        assert b.lcm == 30 and b.max == 5

    def test_divisibility_chain_not_powers(self):
        assert classify([1, 2, 6]).family == Family.F3

    def test_common_coefficient_powers(self):
        # 6, 12, 24 = 6 * 2^{0,1,2}
        assert classify([6, 12, 24]).family == Family.F4

    def test_base_detected_through_root_extraction(self):
        # smallest element above 1 is a square of the base
        assert classify([1, 4, 16]).family == Family.F4
        assert classify([1, 4, 8]).family == Family.F4  # base 2 via root of 4

    def test_singleton_is_f4(self):
        assert classify([7]).family == Family.F4

    def test_sorts_and_dedupes(self):
        b = classify([4, 1, 2, 4])
        assert b.intervals == (1, 2, 4)

    def test_gcd_lcm(self):
        b = classify([6, 9, 18])
        assert b.gcd == 3 and b.lcm == 18

    @pytest.mark.parametrize("bad", [[], [0], [-2, 3], [1.5, 2]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValidationError):
            classify(bad)

    def test_ieee_flags(self):
        assert classify([1, 2, 4]).ieee802154_compatible
        assert not classify([1, 2, 3]).ieee802154_compatible
        assert not classify([2**15]).ieee802154_compatible  # beacon order capped at 14
        assert classify([2**15]).ieee80211_compatible
        assert not classify([2**16]).ieee80211_compatible

    def test_idempotent(self):
        b = classify([2, 3, 4, 6, 12])
        again = classify(b.intervals)
        assert again == b

    @given(st.sets(st.integers(1, 40), min_size=1, max_size=6))
    @settings(max_examples=300)
    def test_family_is_most_specific_and_nested(self, intervals):
        b = classify(intervals)
        items = sorted(intervals)
        lcm = math.lcm(*items)
        is_f2 = max(items) == lcm
        is_f3 = all(y % x == 0 for x, y in zip(items, items[1:]))
        # independent F4 predicate: try every plausible (k, base) pair
        is_f4 = len(items) == 1 or any(
            all(_is_k_power(b_, k, base) for b_ in items)
            for k in range(1, min(items) + 1)
            if min(items) % k == 0
            for base in range(2, max(items) + 1)
        )
        expected = Family.F1
        if is_f2:
            expected = Family.F2
        if is_f3:
            expected = Family.F3
        if is_f4:
            expected = Family.F4
        assert b.family == expected
        # nesting: each family implies the weaker ones
        if b.in_family(Family.F4):
            assert b.in_family(Family.F3)
        if b.in_family(Family.F3):
            assert b.in_family(Family.F2)

    def test_json_round_trip_recomputes_derived_fields(self):
        b = classify([2, 4, 8])
        again = BeaconIntervalSet.from_json(b.to_json())
        assert again == b
        doctored = '{"intervals": [2, 4, 8], "gcd": 99}'
        assert BeaconIntervalSet.from_json(doctored).gcd == 2


def _is_k_power(n, k, base):
    if n % k:
        return False
    q = n // k
    while q % base == 0:
        q //= base
    return q == 1


class TestNormalizeGcd:
    def test_examples(self):
        assert normalize_gcd(classify([2, 4, 8]))[0].intervals == (1, 2, 4)
        assert normalize_gcd(classify([2, 4, 8]))[1] == 2
        assert normalize_gcd(classify([1, 2, 3])) == (classify([1, 2, 3]), 1)
        reduced, d = normalize_gcd(classify([6, 9, 18]))
        assert reduced.intervals == (2, 3, 6) and d == 3

    @given(st.sets(st.integers(1, 30), min_size=1, max_size=5), st.integers(1, 5))
    def test_family_structure_is_gcd_invariant(self, base_set, factor):
        scaled = classify([b * factor for b in base_set])
        reduced, d = normalize_gcd(scaled)
        assert reduced.gcd == 1
        for fam in (Family.F2, Family.F3, Family.F4):
            assert scaled.in_family(fam) == reduced.in_family(fam)


class TestEnumerateConfigurations:
    def test_counts(self):
        assert len(enumerate_configurations([1, 2], 2)) == 6
        assert len(enumerate_configurations([1, 2, 3], 3)) == 18
        assert len(enumerate_configurations([2, 3, 4, 6, 12], 2)) == 54

    def test_order_and_uniqueness(self):
        configs = enumerate_configurations([1, 2], 2)
        assert configs == [
            NetworkConfiguration(0, 1, 1),
            NetworkConfiguration(0, 2, 1),
            NetworkConfiguration(0, 2, 2),
            NetworkConfiguration(1, 1, 1),
            NetworkConfiguration(1, 2, 1),
            NetworkConfiguration(1, 2, 2),
        ]
        assert len(set(configs)) == len(configs)


class TestValidation:
    def test_channel_set(self):
        assert list(ChannelSet(3)) == [0, 1, 2]
        with pytest.raises(ValidationError):
            ChannelSet(0)

    def test_configuration_offset_bounds(self):
        with pytest.raises(ValidationError):
            NetworkConfiguration(0, 2, 3)
        with pytest.raises(ValidationError):
            NetworkConfiguration(0, 2, 0)
        with pytest.raises(ValidationError):
            NetworkConfiguration(-1, 2, 1)
