"""Core data model for operating-room schedule planning.

An :class:`Instance` bundles the surgical waiting list (registrations), the
master surgical schedule (which OR sessions each specialty owns on each day),
per-session durations, and daily bed availability per ward.  A
:class:`Schedule` assigns registrations to sessions; :func:`expand_stays`
turns one assignment into the bed-occupancy records implied by the patient's
admission and stay profile.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

ICU_WARD = 0

PRIORITIES = (1, 2, 3)


@dataclass(frozen=True)
class Registration:
    """One waiting-list entry: a patient linked to a planned procedure.

    ``los_after`` is the total post-surgery stay in days and includes the
    leading ``icu_los`` days spent in the ICU; ``admit_advance`` is the
    number of ward days the patient is admitted before surgery.
    """

    id: int
    priority: int
    surgery_duration: int
    los_after: int
    specialty: int
    icu_los: int
    admit_advance: int


@dataclass(frozen=True)
class MssSlot:
    """One OR session granted to a specialty on a given day."""

    or_id: int
    session: int
    specialty: int
    day: int


@dataclass(frozen=True)
class SessionCapacity:
    """Duration in minutes of the (or_id, session) block, any day it runs."""

    or_id: int
    session: int
    duration: int


@dataclass(frozen=True)
class BedAvailability:
    """Beds available in a ward (0 = ICU) on one day."""

    ward: int
    day: int
    available: int


@dataclass(frozen=True)
class Instance:
    horizon: int
    registrations: tuple[Registration, ...]
    mss: tuple[MssSlot, ...]
    capacities: tuple[SessionCapacity, ...]
    beds: tuple[BedAvailability, ...]

    def capacity_map(self) -> dict[tuple[int, int], int]:
        """(or_id, session) -> session duration in minutes."""
        return {(c.or_id, c.session): c.duration for c in self.capacities}

    def bed_map(self) -> dict[tuple[int, int], int]:
        """(ward, day) -> available beds."""
        return {(b.ward, b.day): b.available for b in self.beds}

    def slot_map(self) -> dict[tuple[int, int, int], MssSlot]:
        """(or_id, session, day) -> slot."""
        return {(s.or_id, s.session, s.day): s for s in self.mss}

    def registration_map(self) -> dict[int, Registration]:
        return {r.id: r for r in self.registrations}


@dataclass(frozen=True)
class PriorityCensus:
    """How many registrations exist per priority tier."""

    total_p1: int
    total_p2: int
    total_p3: int

    @classmethod
    def of(cls, instance: Instance) -> "PriorityCensus":
        counts = {1: 0, 2: 0, 3: 0}
        for reg in instance.registrations:
            if reg.priority in counts:
                counts[reg.priority] += 1
        return cls(counts[1], counts[2], counts[3])

    def total(self, priority: int) -> int:
        return (self.total_p1, self.total_p2, self.total_p3)[priority - 1]


@dataclass(frozen=True)
class Assignment:
    """Registration placed into one OR session on one day.

    The priority is redundant with the registration but kept for readable
    schedule files; consistency is checked by the verifier.
    """

    registration_id: int
    priority: int
    or_id: int
    session: int
    day: int


@dataclass(frozen=True)
class Schedule:
    assignments: tuple[Assignment, ...]

    def by_registration(self) -> dict[int, Assignment]:
        return {a.registration_id: a for a in self.assignments}

    def assigned_ids(self) -> frozenset[int]:
        return frozenset(a.registration_id for a in self.assignments)


EMPTY_SCHEDULE = Schedule(assignments=())


@dataclass(frozen=True)
class StayRecord:
    """One patient occupying one bed (ward or ICU) on one day."""

    registration_id: int
    day: int
    place: int


@dataclass(frozen=True)
class InstanceIssue:
    """A machine-readable instance invariant violation."""

    code: str
    context: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, object]:
        return {"code": self.code, "context": dict(self.context)}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[InstanceIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def _issue(code: str, **context: int) -> InstanceIssue:
    return InstanceIssue(code, tuple(sorted(context.items())))


def validate_instance(instance: Instance) -> ValidationReport:
    """Check every instance invariant; violations are data, not failures."""
    issues: list[InstanceIssue] = []
    if instance.horizon < 1:
        issues.append(_issue("bad-horizon", horizon=instance.horizon))

    seen_regs: set[int] = set()
    for reg in instance.registrations:
        if reg.id in seen_regs:
            issues.append(_issue("duplicate-registration", registration_id=reg.id))
        seen_regs.add(reg.id)
        if reg.priority not in PRIORITIES:
            issues.append(_issue("bad-priority", registration_id=reg.id, priority=reg.priority))
        if reg.surgery_duration <= 0:
            issues.append(_issue("nonpositive-duration", registration_id=reg.id, duration=reg.surgery_duration))
        if reg.los_after < 0 or reg.icu_los < 0 or reg.admit_advance < 0:
            issues.append(_issue("negative-stay", registration_id=reg.id))
        elif reg.icu_los > reg.los_after:
            issues.append(_issue("icu-exceeds-los", registration_id=reg.id, icu_los=reg.icu_los, los_after=reg.los_after))
        if reg.specialty < 1:
            issues.append(_issue("bad-specialty", registration_id=reg.id, specialty=reg.specialty))

    capacities = {}
    for cap in instance.capacities:
        key = (cap.or_id, cap.session)
        if key in capacities:
            issues.append(_issue("duplicate-capacity", or_id=cap.or_id, session=cap.session))
        capacities[key] = cap.duration
        if cap.duration <= 0:
            issues.append(_issue("nonpositive-capacity", or_id=cap.or_id, session=cap.session, duration=cap.duration))

    seen_slots: set[tuple[int, int, int]] = set()
    for slot in instance.mss:
        key = (slot.or_id, slot.session, slot.day)
        if key in seen_slots:
            issues.append(_issue("duplicate-slot", or_id=slot.or_id, session=slot.session, day=slot.day))
        seen_slots.add(key)
        if not 1 <= slot.day <= instance.horizon:
            issues.append(_issue("slot-day-out-of-range", or_id=slot.or_id, session=slot.session, day=slot.day))
        if (slot.or_id, slot.session) not in capacities:
            issues.append(_issue("missing-capacity", or_id=slot.or_id, session=slot.session))

    bed_entries: set[tuple[int, int]] = set()
    for bed in instance.beds:
        key = (bed.ward, bed.day)
        if key in bed_entries:
            issues.append(_issue("duplicate-beds", ward=bed.ward, day=bed.day))
        bed_entries.add(key)
        if bed.available < 0:
            issues.append(_issue("negative-beds", ward=bed.ward, day=bed.day, available=bed.available))

    required_wards = {ICU_WARD} | {reg.specialty for reg in instance.registrations if reg.specialty >= 1}
    for ward in sorted(required_wards):
        for day in range(1, max(instance.horizon, 0) + 1):
            if (ward, day) not in bed_entries:
                issues.append(_issue("missing-beds", ward=ward, day=day))

    return ValidationReport(tuple(issues))


def expand_stays(registration: Registration, surgery_day: int, horizon: int) -> tuple[StayRecord, ...]:
    """Bed-occupancy records implied by operating on ``surgery_day``.

    Pre-surgery ward days run from ``surgery_day - admit_advance`` to the day
    before surgery; the ICU (ward 0) holds the patient for the first
    ``icu_los`` days starting on the surgery day; the remaining
    ``los_after - icu_los`` days are spent in the specialty ward.  Days
    outside ``[1, horizon]`` are dropped.
    """
    if not 1 <= surgery_day <= horizon:
        raise ValueError(f"surgery_day {surgery_day} outside horizon [1, {horizon}]")
    reg = registration
    records: list[StayRecord] = []
    for day in range(surgery_day - reg.admit_advance, surgery_day):
        if 1 <= day <= horizon:
            records.append(StayRecord(reg.id, day, reg.specialty))
    for day in range(surgery_day, surgery_day + reg.icu_los):
        if 1 <= day <= horizon:
            records.append(StayRecord(reg.id, day, ICU_WARD))
    for day in range(surgery_day + reg.icu_los, surgery_day + reg.los_after):
        if 1 <= day <= horizon:
            records.append(StayRecord(reg.id, day, reg.specialty))
    return tuple(records)


def occupancy(instance: Instance, schedule: Schedule) -> dict[tuple[int, int], int]:
    """(ward, day) -> number of occupied beds implied by the schedule."""
    regs = instance.registration_map()
    counts: dict[tuple[int, int], int] = {}
    for assignment in schedule.assignments:
        reg = regs.get(assignment.registration_id)
        if reg is None:
            continue
        if not 1 <= assignment.day <= instance.horizon:
            continue
        for stay in expand_stays(reg, assignment.day, instance.horizon):
            key = (stay.place, stay.day)
            counts[key] = counts.get(key, 0) + 1
    return counts
