"""Schedule verification, lexicographic objective, and efficiency metrics.

The verifier is the ground truth for feasibility: it re-derives session
loads and bed occupancy from scratch and reports one violation per
offending context, so tests can assert exact counts.  It never repairs or
modifies a schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ICU_WARD,
    Instance,
    PriorityCensus,
    Schedule,
    expand_stays,
)

VIOLATION_CODES = (
    "duplicate-session",
    "duplicate-or",
    "capacity-overflow",
    "ward-overflow",
    "icu-overflow",
    "p1-unassigned",
    "mss-mismatch",
)


class InfeasibleScheduleError(ValueError):
    """Raised when metrics or objectives are requested for an invalid schedule."""

    def __init__(self, violations: list["Violation"]):
        super().__init__(f"schedule has {len(violations)} violations")
        self.violations = violations


@dataclass(frozen=True)
class Violation:
    code: str
    context: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, object]:
        return {"code": self.code, "context": dict(self.context)}


def _violation(code: str, **context: int) -> Violation:
    return Violation(code, tuple(sorted(context.items())))


@dataclass(frozen=True, order=True)
class ObjectiveVector:
    """Lexicographic schedule cost: unassigned P2 count first, then P3.

    Dataclass ordering compares fields in declaration order, which is
    exactly the level-3-then-level-2 comparison.
    """

    unassigned_p2: int
    unassigned_p3: int


@dataclass(frozen=True)
class Metrics:
    assigned_by_priority: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    or_time_efficiency: float
    bed_occupancy_efficiency: float

    @property
    def assigned_total(self) -> tuple[int, int]:
        assigned = sum(a for a, _ in self.assigned_by_priority)
        total = sum(t for _, t in self.assigned_by_priority)
        return assigned, total


def check_schedule(instance: Instance, schedule: Schedule, *, require_p1: bool = True) -> list[Violation]:
    """All hard-constraint violations of the schedule, each context once.

    ``require_p1=False`` drops the every-P1-assigned rule; the rescheduler
    uses that mode because dropping previously planned registrations is a
    soft cost there, not a hard failure.
    """
    violations: list[Violation] = []
    regs = instance.registration_map()
    slots = instance.slot_map()
    capacities = instance.capacity_map()
    beds = instance.bed_map()

    by_reg: dict[int, list] = {}
    for assignment in schedule.assignments:
        by_reg.setdefault(assignment.registration_id, []).append(assignment)

    valid_by_reg: dict[int, list] = {}
    for reg_id, assignments in by_reg.items():
        reg = regs.get(reg_id)
        kept = []
        for a in assignments:
            slot = slots.get((a.or_id, a.session, a.day))
            if reg is None or slot is None or slot.specialty != reg.specialty or a.priority != reg.priority:
                violations.append(
                    _violation("mss-mismatch", registration_id=reg_id, or_id=a.or_id, session=a.session, day=a.day)
                )
            else:
                kept.append(a)
        if kept:
            valid_by_reg[reg_id] = kept

    for reg_id, assignments in valid_by_reg.items():
        if len(assignments) < 2:
            continue
        per_or: dict[int, int] = {}
        for a in assignments:
            per_or[a.or_id] = per_or.get(a.or_id, 0) + 1
        if len(per_or) > 1:
            violations.append(_violation("duplicate-or", registration_id=reg_id))
        for or_id, count in sorted(per_or.items()):
            if count > 1:
                violations.append(_violation("duplicate-session", registration_id=reg_id, or_id=or_id))

    loads: dict[tuple[int, int, int], int] = {}
    occupancy: dict[tuple[int, int], int] = {}
    for reg_id, assignments in valid_by_reg.items():
        reg = regs[reg_id]
        for a in assignments:
            key = (a.or_id, a.session, a.day)
            loads[key] = loads.get(key, 0) + reg.surgery_duration
            for stay in expand_stays(reg, a.day, instance.horizon):
                cell = (stay.place, stay.day)
                occupancy[cell] = occupancy.get(cell, 0) + 1

    for (or_id, session, day), load in sorted(loads.items()):
        capacity = capacities.get((or_id, session))
        if capacity is not None and load > capacity:
            violations.append(
                _violation("capacity-overflow", or_id=or_id, session=session, day=day, load=load, capacity=capacity)
            )

    for (ward, day), occupied in sorted(occupancy.items()):
        available = beds.get((ward, day))
        if available is not None and occupied > available:
            code = "icu-overflow" if ward == ICU_WARD else "ward-overflow"
            violations.append(_violation(code, ward=ward, day=day, occupied=occupied, available=available))

    if require_p1:
        assigned_ids = set(valid_by_reg)
        for reg in instance.registrations:
            if reg.priority == 1 and reg.id not in assigned_ids:
                violations.append(_violation("p1-unassigned", registration_id=reg.id))

    return violations


def evaluate_objective(instance: Instance, schedule: Schedule) -> ObjectiveVector:
    """Unassigned counts per soft priority tier; rejects invalid schedules."""
    violations = check_schedule(instance, schedule)
    if violations:
        raise InfeasibleScheduleError(violations)
    census = PriorityCensus.of(instance)
    regs = instance.registration_map()
    assigned = {2: 0, 3: 0}
    for a in schedule.assignments:
        priority = regs[a.registration_id].priority
        if priority in assigned:
            assigned[priority] += 1
    return ObjectiveVector(
        unassigned_p2=census.total_p2 - assigned[2],
        unassigned_p3=census.total_p3 - assigned[3],
    )


def compare_objectives(a: ObjectiveVector, b: ObjectiveVector) -> int:
    """Negative when ``a`` is better (smaller), 0 when equal, positive otherwise."""
    if a == b:
        return 0
    return -1 if a < b else 1


def compute_metrics(instance: Instance, schedule: Schedule) -> Metrics:
    """Per-priority assignment counts plus OR-time and bed-occupancy efficiency.

    OR time efficiency is assigned surgery minutes over the total session
    minutes offered by the MSS.  Bed occupancy efficiency is occupied
    bed-days over available bed-days, summed across all wards (ICU
    included) and all days of the horizon.
    """
    violations = check_schedule(instance, schedule)
    if violations:
        raise InfeasibleScheduleError(violations)
    census = PriorityCensus.of(instance)
    regs = instance.registration_map()
    capacities = instance.capacity_map()

    assigned = {1: 0, 2: 0, 3: 0}
    assigned_minutes = 0
    occupied_bed_days = 0
    for a in schedule.assignments:
        reg = regs[a.registration_id]
        assigned[reg.priority] += 1
        assigned_minutes += reg.surgery_duration
        occupied_bed_days += len(expand_stays(reg, a.day, instance.horizon))

    total_session_minutes = sum(capacities[(s.or_id, s.session)] for s in instance.mss)
    available_bed_days = sum(b.available for b in instance.beds if 1 <= b.day <= instance.horizon)

    return Metrics(
        assigned_by_priority=(
            (assigned[1], census.total_p1),
            (assigned[2], census.total_p2),
            (assigned[3], census.total_p3),
        ),
        or_time_efficiency=assigned_minutes / total_session_minutes if total_session_minutes else 0.0,
        bed_occupancy_efficiency=occupied_bed_days / available_bed_days if available_bed_days else 0.0,
    )
