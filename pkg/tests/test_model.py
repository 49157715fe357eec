from __future__ import annotations

import random

import pytest

from orsched.fileio import (
    FormatError,
    instance_from_dict,
    instance_to_dict,
    read_instance,
    schedule_from_dict,
    schedule_to_dict,
    write_instance,
)
from orsched.model import (
    Assignment,
    ICU_WARD,
    Instance,
    Schedule,
    StayRecord,
    expand_stays,
    validate_instance,
)

from conftest import full_beds, reg, small_instance


class TestExpandStays:
    def test_ward_icu_ward_sequence(self):
        r = reg(1, los=3, icu=1, advance=1, specialty=2)
        stays = expand_stays(r, surgery_day=3, horizon=5)
        assert stays == (
            StayRecord(1, 2, 2),
            StayRecord(1, 3, ICU_WARD),
            StayRecord(1, 4, 2),
            StayRecord(1, 5, 2),
        )

    def test_single_day_stay(self):
        r = reg(7, los=1, icu=0, advance=0, specialty=4)
        assert expand_stays(r, surgery_day=5, horizon=5) == (StayRecord(7, 5, 4),)

    def test_clamping_and_icu_only(self):
        r = reg(2, los=2, icu=2, advance=1, specialty=1)
        stays = expand_stays(r, surgery_day=1, horizon=5)
        assert stays == (StayRecord(2, 1, ICU_WARD), StayRecord(2, 2, ICU_WARD))

    def test_out_of_horizon_surgery_day_rejected(self):
        with pytest.raises(ValueError):
            expand_stays(reg(1), surgery_day=6, horizon=5)

    def test_partition_property_random(self):
        rng = random.Random(42)
        for _ in range(500):
            los = rng.randint(0, 12)
            icu = rng.randint(0, los) if los else 0
            advance = rng.randint(0, 3)
            horizon = rng.randint(1, 15)
            day = rng.randint(1, horizon)
            r = reg(1, los=los, icu=icu, advance=advance, specialty=3)
            stays = expand_stays(r, day, horizon)

            assert len(stays) <= advance + los
            icu_days = {s.day for s in stays if s.place == ICU_WARD}
            ward_days = {s.day for s in stays if s.place == 3}
            assert icu_days == set(range(day, day + icu)) & set(range(1, horizon + 1))
            expected_ward = (
                set(range(day - advance, day)) | set(range(day + icu, day + los))
            ) & set(range(1, horizon + 1))
            assert ward_days == expected_ward
            assert not icu_days & ward_days
            if day - advance >= 1 and day + los - 1 <= horizon:
                assert len(stays) == advance + los


class TestValidateInstance:
    def test_icu_exceeding_los_reported(self):
        instance = small_instance([reg(1, los=2, icu=3)])
        report = validate_instance(instance)
        assert not report.ok
        assert any(issue.code == "icu-exceeds-los" for issue in report.issues)

    def test_empty_instance_ok(self):
        instance = Instance(
            horizon=5,
            registrations=(),
            mss=(),
            capacities=(),
            beds=full_beds(5, (0,)),
        )
        assert validate_instance(instance).ok

    def test_missing_bed_rows_reported(self):
        instance = small_instance([reg(1, specialty=2)], beds=full_beds(2, (0,)))
        codes = {issue.code for issue in validate_instance(instance).issues}
        assert "missing-beds" in codes

    def test_slot_without_capacity_reported(self):
        base = small_instance([reg(1)])
        instance = Instance(
            horizon=base.horizon,
            registrations=base.registrations,
            mss=base.mss,
            capacities=(),
            beds=base.beds,
        )
        codes = {issue.code for issue in validate_instance(instance).issues}
        assert "missing-capacity" in codes

    def test_duplicate_registration_and_bad_priority(self):
        instance = small_instance([reg(1, priority=5), reg(1)])
        codes = {issue.code for issue in validate_instance(instance).issues}
        assert {"duplicate-registration", "bad-priority"} <= codes


class TestFileFormats:
    def test_instance_round_trip(self, tmp_path):
        instance = small_instance(
            [reg(1, priority=1, icu=1, los=2, advance=1), reg(2, priority=3, specialty=1)],
            horizon=3,
            sessions=(1, 2),
        )
        path = tmp_path / "instance.json"
        write_instance(instance, path, metadata={"origin": "test"})
        assert read_instance(path) == instance

    def test_schedule_round_trip(self):
        schedule = Schedule(assignments=(Assignment(1, 2, 1, 1, 1), Assignment(2, 1, 1, 2, 2)))
        assert schedule_from_dict(schedule_to_dict(schedule)) == schedule

    def test_format_version_checked(self):
        document = instance_to_dict(small_instance([reg(1)]))
        document["format"] = 99
        with pytest.raises(FormatError):
            instance_from_dict(document)

    def test_missing_field_rejected(self):
        document = instance_to_dict(small_instance([reg(1)]))
        del document["registrations"][0]["priority"]
        with pytest.raises(FormatError):
            instance_from_dict(document)

    def test_non_integer_identifier_rejected(self):
        document = instance_to_dict(small_instance([reg(1)]))
        document["registrations"][0]["id"] = "one"
        with pytest.raises(FormatError):
            instance_from_dict(document)
