from __future__ import annotations

import collections
import math

import numpy as np
import pytest

from orsched.fileio import instance_to_dict, write_instance
from orsched.generate import (
    SCENARIOS,
    generate_instance,
    metadata_for,
    sample_truncated_normal,
    scenario,
)
from orsched.model import validate_instance

# Reference bed tables, kept verbatim so drift in the presets is caught.
BED_TABLES = {
    "A": {
        0: (40, 40, 40, 40, 40),
        1: (80, 80, 80, 80, 80),
        2: (58, 58, 58, 58, 58),
        3: (65, 65, 65, 65, 65),
        4: (57, 57, 57, 57, 57),
        5: (40, 40, 40, 40, 40),
    },
    "B": {
        0: (4, 4, 5, 5, 6),
        1: (20, 30, 40, 45, 50),
        2: (10, 15, 23, 30, 35),
        3: (10, 14, 21, 30, 35),
        4: (8, 10, 14, 16, 18),
        5: (10, 14, 20, 23, 25),
    },
    "C": {
        0: (4, 4, 5, 5, 6),
        1: (10, 15, 20, 25, 30),
        2: (7, 10, 11, 14, 18),
        3: (7, 10, 13, 16, 20),
        4: (4, 6, 8, 11, 13),
        5: (6, 9, 12, 15, 18),
    },
}

REGISTRATIONS_PER_HORIZON = {
    1: (16, 14, 14, 12, 14),
    2: (32, 28, 28, 24, 28),
    3: (48, 42, 42, 36, 42),
    5: (80, 70, 70, 60, 70),
    7: (112, 98, 98, 84, 98),
    10: (160, 140, 140, 120, 140),
    15: (240, 210, 210, 180, 210),
}


class TestTruncatedNormal:
    def test_zero_std_rounds_mean(self):
        rng = np.random.default_rng(0)
        assert sample_truncated_normal(7.91, 0.0, 1, rng) == 8

    def test_zero_std_respects_lower_bound(self):
        rng = np.random.default_rng(0)
        assert sample_truncated_normal(0.2, 0.0, 3, rng) == 3

    def test_draws_respect_lower_bound(self):
        rng = np.random.default_rng(1)
        draws = [sample_truncated_normal(2.48, 1.0, 1, rng) for _ in range(100_000)]
        assert min(draws) >= 1

    def test_sample_mean_matches_analytic_mean(self):
        # Exact mean/sd of the integer-rounded left-truncated normal at
        # (2.48, 1, >=1), computed from normal CDF differences.
        analytic_mean = 2.6176520810618356
        analytic_sd = 0.9331390831751526
        n = 100_000
        rng = np.random.default_rng(2024)
        draws = [sample_truncated_normal(2.48, 1.0, 1, rng) for _ in range(n)]
        standard_error = analytic_sd / math.sqrt(n)
        assert abs(sum(draws) / n - analytic_mean) <= 3 * standard_error


class TestGenerateInstance:
    def test_five_day_scenario_a_shape(self):
        instance = generate_instance(scenario("A"), 5, 0)
        assert len(instance.registrations) == 350
        by_specialty = collections.Counter(r.specialty for r in instance.registrations)
        assert tuple(by_specialty[s] for s in (1, 2, 3, 4, 5)) == (80, 70, 70, 60, 70)
        beds = instance.bed_map()
        assert all(beds[(1, day)] == 80 for day in range(1, 6))
        assert sum(instance.capacity_map()[(s.or_id, s.session)] for s in instance.mss) == 30_000

    @pytest.mark.parametrize("days", sorted(REGISTRATIONS_PER_HORIZON))
    def test_registration_counts_scale_exactly(self, days):
        instance = generate_instance(scenario("A"), days, 3)
        by_specialty = collections.Counter(r.specialty for r in instance.registrations)
        assert tuple(by_specialty[s] for s in (1, 2, 3, 4, 5)) == REGISTRATIONS_PER_HORIZON[days]

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_bed_tables_match_reference_values(self, name):
        instance = generate_instance(scenario(name), 5, 1)
        beds = instance.bed_map()
        for ward, row in BED_TABLES[name].items():
            assert tuple(beds[(ward, day)] for day in range(1, 6)) == row

    def test_bed_cycling_beyond_preset_period(self):
        instance = generate_instance(scenario("B"), 12, 1)
        beds = instance.bed_map()
        for ward, row in BED_TABLES["B"].items():
            for day in range(1, 13):
                assert beds[(ward, day)] == row[(day - 1) % 5]
        assert metadata_for(scenario("B"), 12, 1)["beds_cycled"] is True

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_generated_instances_validate(self, name):
        for seed in (0, 7):
            report = validate_instance(generate_instance(scenario(name), 5, seed))
            assert report.ok

    def test_icu_los_clamped_to_los(self):
        for seed in range(5):
            instance = generate_instance(scenario("C"), 5, seed)
            for r in instance.registrations:
                assert 0 <= r.icu_los <= r.los_after
                assert r.los_after >= 1
                assert r.surgery_duration >= 1

    def test_or_split_matches_reference_distribution(self):
        instance = generate_instance(scenario("A"), 5, 0)
        ors_by_specialty: dict[int, set[int]] = collections.defaultdict(set)
        for slot in instance.mss:
            ors_by_specialty[slot.specialty].add(slot.or_id)
        assert {s: len(ors) for s, ors in ors_by_specialty.items()} == {1: 3, 2: 2, 3: 2, 4: 1, 5: 2}

    def test_same_seed_is_byte_identical(self, tmp_path):
        paths = []
        for run in range(2):
            path = tmp_path / f"run{run}.json"
            spec = scenario("B")
            write_instance(generate_instance(spec, 5, 7), path, metadata_for(spec, 5, 7))
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_different_seeds_differ(self):
        a = instance_to_dict(generate_instance(scenario("A"), 5, 1))
        b = instance_to_dict(generate_instance(scenario("A"), 5, 2))
        assert a != b

    def test_inexact_scaling_warns_and_rounds(self):
        from orsched.generate import ScenarioSpec, SpecialtyGenParams
        from orsched.model import BedAvailability

        spec = ScenarioSpec(
            name="custom",
            bed_table=tuple(
                BedAvailability(ward, day, 20) for ward in (0, 1) for day in (1, 2, 3)
            ),
            specialty_params=(
                SpecialtyGenParams(1, 7, 1, 60.0, 5.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0),
            ),
        )
        with pytest.warns(UserWarning, match="rounding"):
            instance = generate_instance(spec, 3, 0)
        assert len(instance.registrations) == round(7 * 3 / 5)

    def test_priority_shares_near_configured_weights(self):
        counts = collections.Counter()
        for seed in range(10):
            instance = generate_instance(scenario("A"), 5, seed)
            counts.update(r.priority for r in instance.registrations)
        total = sum(counts.values())
        shares = tuple(counts[p] / total for p in (1, 2, 3))
        for share, expected in zip(shares, (0.20, 0.40, 0.40)):
            assert abs(share - expected) < 0.05
