"""Randomized instance generator with the A/B/C scenario presets.

Scenario A has abundant beds (OR time is the bottleneck); B cuts beds back
hard; C is an extreme shortage.  All three share the same ten operating
rooms (three for specialty 1, two each for 2, 3 and 5, one for specialty 4),
two 300-minute sessions per OR per day, and the same per-specialty
registration distributions.  Registrations are drawn per seed from a named
portable generator (numpy PCG64) so the same (scenario, days, seed) triple
always produces byte-identical instance files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import (
    BedAvailability,
    Instance,
    MssSlot,
    Registration,
    SessionCapacity,
)

GENERATOR_VERSION = 1
SESSION_MINUTES = 300
SESSIONS_PER_DAY = (1, 2)
PRESET_PERIOD_DAYS = 5


@dataclass(frozen=True)
class SpecialtyGenParams:
    specialty: int
    registrations_per_5day: int
    or_count: int
    surgery_mean: float
    surgery_std: float
    los_mean: float
    los_std: float
    icu_fraction: float
    icu_mean: float
    icu_std: float
    admit_advance: int


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    bed_table: tuple[BedAvailability, ...]
    specialty_params: tuple[SpecialtyGenParams, ...]
    priority_weights: tuple[float, float, float] = (0.20, 0.40, 0.40)


def _beds(rows: dict[int, tuple[int, ...]]) -> tuple[BedAvailability, ...]:
    return tuple(
        BedAvailability(ward=ward, day=day, available=count)
        for ward, counts in rows.items()
        for day, count in enumerate(counts, start=1)
    )


_SPECIALTY_PARAMS = (
    SpecialtyGenParams(1, 80, 3, 124.0, 59.52, 7.91, 2.0, 0.10, 1.0, 1.0, 1),
    SpecialtyGenParams(2, 70, 2, 99.0, 17.82, 9.81, 2.0, 0.10, 1.0, 1.0, 1),
    SpecialtyGenParams(3, 70, 2, 134.0, 25.46, 11.06, 3.0, 0.10, 1.0, 1.0, 1),
    SpecialtyGenParams(4, 60, 1, 95.0, 19.95, 6.36, 1.0, 0.10, 1.0, 1.0, 0),
    SpecialtyGenParams(5, 70, 2, 105.0, 30.45, 2.48, 1.0, 0.10, 1.0, 1.0, 0),
)

SCENARIOS: dict[str, ScenarioSpec] = {
    "A": ScenarioSpec(
        name="A",
        bed_table=_beds({
            0: (40, 40, 40, 40, 40),
            1: (80, 80, 80, 80, 80),
            2: (58, 58, 58, 58, 58),
            3: (65, 65, 65, 65, 65),
            4: (57, 57, 57, 57, 57),
            5: (40, 40, 40, 40, 40),
        }),
        specialty_params=_SPECIALTY_PARAMS,
    ),
    "B": ScenarioSpec(
        name="B",
        bed_table=_beds({
            0: (4, 4, 5, 5, 6),
            1: (20, 30, 40, 45, 50),
            2: (10, 15, 23, 30, 35),
            3: (10, 14, 21, 30, 35),
            4: (8, 10, 14, 16, 18),
            5: (10, 14, 20, 23, 25),
        }),
        specialty_params=_SPECIALTY_PARAMS,
    ),
    "C": ScenarioSpec(
        name="C",
        bed_table=_beds({
            0: (4, 4, 5, 5, 6),
            1: (10, 15, 20, 25, 30),
            2: (7, 10, 11, 14, 18),
            3: (7, 10, 13, 16, 20),
            4: (4, 6, 8, 11, 13),
            5: (6, 9, 12, 15, 18),
        }),
        specialty_params=_SPECIALTY_PARAMS,
    ),
}


def scenario(name: str) -> ScenarioSpec:
    try:
        return SCENARIOS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}") from None


def sample_truncated_normal(mean: float, std: float, lower_bound: int, rng: np.random.Generator) -> int:
    """Integer-rounded normal draw, rejection-sampled to stay >= lower_bound."""
    if std <= 0:
        return max(int(round(mean)), lower_bound)
    while True:
        value = rng.normal(mean, std)
        if value >= lower_bound:
            return int(round(value))


def _sample_priority(weights: tuple[float, float, float], rng: np.random.Generator) -> int:
    draw = rng.random()
    if draw < weights[0]:
        return 1
    if draw < weights[0] + weights[1]:
        return 2
    return 3


def _registration_counts(spec: ScenarioSpec, days: int) -> list[int]:
    counts = []
    for params in spec.specialty_params:
        exact = params.registrations_per_5day * days
        if exact % PRESET_PERIOD_DAYS == 0:
            counts.append(exact // PRESET_PERIOD_DAYS)
        else:
            rounded = round(exact / PRESET_PERIOD_DAYS)
            warnings.warn(
                f"registration count for specialty {params.specialty} at {days} days "
                f"is not an exact scaling; rounding to {rounded}",
                stacklevel=3,
            )
            counts.append(rounded)
    return counts


def _or_assignments(spec: ScenarioSpec) -> list[tuple[int, int]]:
    """(or_id, specialty) pairs, OR ids assigned in specialty order."""
    pairs = []
    next_or = 1
    for params in spec.specialty_params:
        for _ in range(params.or_count):
            pairs.append((next_or, params.specialty))
            next_or += 1
    return pairs


def generate_instance(spec: ScenarioSpec, days: int, seed: int) -> Instance:
    """Deterministic instance for the scenario at the given horizon.

    Bed tables longer than the preset period repeat it cyclically (day 6
    reuses day 1 and so on); `metadata_for` flags when that happened.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = np.random.default_rng(seed)

    registrations: list[Registration] = []
    next_id = 1
    for params, count in zip(spec.specialty_params, _registration_counts(spec, days)):
        for _ in range(count):
            priority = _sample_priority(spec.priority_weights, rng)
            surgery = max(int(round(rng.normal(params.surgery_mean, params.surgery_std))), 1)
            los_after = sample_truncated_normal(params.los_mean, params.los_std, 1, rng)
            if rng.random() < params.icu_fraction:
                icu_los = min(sample_truncated_normal(params.icu_mean, params.icu_std, 1, rng), los_after)
            else:
                icu_los = 0
            registrations.append(
                Registration(
                    id=next_id,
                    priority=priority,
                    surgery_duration=surgery,
                    los_after=los_after,
                    specialty=params.specialty,
                    icu_los=icu_los,
                    admit_advance=params.admit_advance,
                )
            )
            next_id += 1

    mss = tuple(
        MssSlot(or_id=or_id, session=session, specialty=specialty, day=day)
        for day in range(1, days + 1)
        for or_id, specialty in _or_assignments(spec)
        for session in SESSIONS_PER_DAY
    )
    capacities = tuple(
        SessionCapacity(or_id=or_id, session=session, duration=SESSION_MINUTES)
        for or_id, _ in _or_assignments(spec)
        for session in SESSIONS_PER_DAY
    )

    table_period = max(b.day for b in spec.bed_table)
    by_ward_day = {(b.ward, b.day): b.available for b in spec.bed_table}
    wards = sorted({b.ward for b in spec.bed_table})
    beds = tuple(
        BedAvailability(ward=ward, day=day, available=by_ward_day[(ward, (day - 1) % table_period + 1)])
        for ward in wards
        for day in range(1, days + 1)
    )

    return Instance(
        horizon=days,
        registrations=tuple(registrations),
        mss=mss,
        capacities=capacities,
        beds=beds,
    )


def metadata_for(spec: ScenarioSpec, days: int, seed: int) -> dict[str, object]:
    table_period = max(b.day for b in spec.bed_table)
    return {
        "generator": "orsched",
        "generator_version": GENERATOR_VERSION,
        "rng": "numpy-pcg64",
        "scenario": spec.name,
        "days": days,
        "seed": seed,
        "beds_cycled": days > table_period,
    }
