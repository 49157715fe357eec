from __future__ import annotations

import random

from orsched.model import (
    BedAvailability,
    Instance,
    MssSlot,
    Registration,
    SessionCapacity,
)


def reg(
    reg_id: int,
    priority: int = 2,
    duration: int = 100,
    los: int = 1,
    specialty: int = 1,
    icu: int = 0,
    advance: int = 0,
) -> Registration:
    return Registration(
        id=reg_id,
        priority=priority,
        surgery_duration=duration,
        los_after=los,
        specialty=specialty,
        icu_los=icu,
        admit_advance=advance,
    )


def full_beds(horizon: int, wards: tuple[int, ...], available: int = 50) -> tuple[BedAvailability, ...]:
    return tuple(
        BedAvailability(ward=ward, day=day, available=available)
        for ward in wards
        for day in range(1, horizon + 1)
    )


def small_instance(
    registrations,
    horizon: int = 2,
    or_specialties: dict[int, int] | None = None,
    sessions: tuple[int, ...] = (1,),
    capacity: int = 300,
    beds: tuple[BedAvailability, ...] | None = None,
) -> Instance:
    """One-stop builder for hand-written instances.

    ``or_specialties`` maps OR id to the specialty owning it on every day;
    defaults to OR 1 for specialty 1.
    """
    or_specialties = or_specialties or {1: 1}
    mss = tuple(
        MssSlot(or_id=or_id, session=session, specialty=specialty, day=day)
        for or_id, specialty in or_specialties.items()
        for day in range(1, horizon + 1)
        for session in sessions
    )
    capacities = tuple(
        SessionCapacity(or_id=or_id, session=session, duration=capacity)
        for or_id in or_specialties
        for session in sessions
    )
    registrations = tuple(registrations)
    if beds is None:
        wards = tuple(sorted({0} | {r.specialty for r in registrations}))
        beds = full_beds(horizon, wards)
    return Instance(
        horizon=horizon,
        registrations=registrations,
        mss=mss,
        capacities=capacities,
        beds=beds,
    )


def random_tiny_instance(seed: int) -> Instance:
    """Small random instances for oracle cross-checks.

    Capacities, beds, and stay profiles are drawn tight enough that every
    hard constraint actually bites somewhere in the family.
    """
    rng = random.Random(seed)
    horizon = rng.randint(1, 2)
    num_ors = rng.randint(1, 2)
    num_sessions = rng.randint(1, 2)
    specialties = (1, 2)

    or_specialties = {or_id: rng.choice(specialties) for or_id in range(1, num_ors + 1)}
    sessions = tuple(range(1, num_sessions + 1))
    capacities = tuple(
        SessionCapacity(or_id=or_id, session=session, duration=rng.choice((120, 180, 240, 300)))
        for or_id in or_specialties
        for session in sessions
    )
    mss = tuple(
        MssSlot(or_id=or_id, session=session, specialty=specialty, day=day)
        for or_id, specialty in or_specialties.items()
        for day in range(1, horizon + 1)
        for session in sessions
    )
    registrations = []
    for reg_id in range(1, rng.randint(1, 8) + 1):
        los = rng.randint(0, 3)
        registrations.append(
            Registration(
                id=reg_id,
                priority=rng.choices((1, 2, 3), weights=(2, 4, 4))[0],
                surgery_duration=rng.randint(30, 200),
                los_after=los,
                specialty=rng.choice(specialties),
                icu_los=rng.randint(0, min(los, 1)),
                admit_advance=rng.randint(0, 1),
            )
        )
    beds = tuple(
        BedAvailability(ward=ward, day=day, available=rng.randint(1, 4))
        for ward in (0, 1, 2)
        for day in range(1, horizon + 1)
    )
    return Instance(
        horizon=horizon,
        registrations=tuple(registrations),
        mss=mss,
        capacities=capacities,
        beds=beds,
    )
