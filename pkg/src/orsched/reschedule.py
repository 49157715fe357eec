"""Rescheduling after a mid-horizon disruption.

Starting from an executed prefix of an old schedule, the postponed
registrations (by default those planned on day 2) must be reinserted into
the remaining days.  Previously planned registrations in that window may be
kept, moved to another session, or dropped; costs are minimized
lexicographically: dropped P1/P2 registrations first (level 4), then
dropped P3 registrations originally early in the window (level 3), then
dropped P3 registrations from the window's last day (level 2), and finally
the total day shift of everything that stays planned (level 1).

Bed capacity is residual: patients operated before the disruption keep
their beds for the rest of their stay, and registrations outside the
rescheduled specialty pass through untouched while still occupying beds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from . import engine
from .model import (
    Assignment,
    BedAvailability,
    Instance,
    Registration,
    Schedule,
    expand_stays,
    validate_instance,
)
from .solver import SolverConfig


class RescheduleError(Exception):
    """Reschedule failure with a machine-readable ``code``."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RescheduleRequest:
    """``reschedule_days`` is an inclusive (first, last) day range; when
    omitted it defaults to the days strictly after the disruption."""

    instance: Instance
    old_schedule: Schedule
    postponed: frozenset[int]
    disruption_day: int = 2
    reschedule_days: tuple[int, int] | None = None
    specialty_filter: int | None = None

    def window(self) -> tuple[int, int]:
        if self.reschedule_days is not None:
            return self.reschedule_days
        return (self.disruption_day + 1, self.instance.horizon)


@dataclass(frozen=True, order=True)
class RescheduleObjective:
    level4: int
    level3: int
    level2: int
    level1: int


@dataclass(frozen=True)
class RescheduleOutcome:
    new_schedule: Schedule
    objective: RescheduleObjective
    dropped: frozenset[int]


@dataclass(frozen=True)
class RescheduleIncumbent:
    new_schedule: Schedule
    objective: RescheduleObjective
    elapsed: float


@dataclass(frozen=True)
class _Parts:
    executed: tuple[Assignment, ...]
    postponed: tuple[Assignment, ...]
    candidates: tuple[Assignment, ...]
    passthrough: tuple[Assignment, ...]


def validate_request(request: RescheduleRequest) -> None:
    report = validate_instance(request.instance)
    if not report.ok:
        codes = sorted({issue.code for issue in report.issues})
        raise ValueError(f"instance fails validation: {', '.join(codes)}")
    horizon = request.instance.horizon
    first, last = request.window()
    if not request.disruption_day < first <= last <= horizon:
        raise ValueError(
            f"reschedule window [{first}, {last}] must lie strictly after "
            f"day {request.disruption_day} and within the horizon {horizon}"
        )
    by_reg = request.old_schedule.by_registration()
    if len(by_reg) != len(request.old_schedule.assignments):
        raise ValueError("old schedule assigns some registration more than once")
    on_disruption_day = {
        reg_id for reg_id, a in by_reg.items() if a.day == request.disruption_day
    }
    stray = request.postponed - on_disruption_day
    if stray:
        raise ValueError(
            f"postponed registrations {sorted(stray)} were not scheduled on "
            f"day {request.disruption_day} in the old schedule"
        )
    regs = request.instance.registration_map()
    unknown = [a.registration_id for a in request.old_schedule.assignments if a.registration_id not in regs]
    if unknown:
        raise ValueError(f"old schedule references unknown registrations {sorted(unknown)}")
    if request.specialty_filter is not None:
        outside = [
            reg_id for reg_id in request.postponed
            if regs[reg_id].specialty != request.specialty_filter
        ]
        if outside:
            raise ValueError(
                f"postponed registrations {sorted(outside)} are outside "
                f"specialty {request.specialty_filter}"
            )


def _split(request: RescheduleRequest) -> _Parts:
    regs = request.instance.registration_map()
    first, last = request.window()
    executed, postponed, candidates, passthrough = [], [], [], []
    for a in request.old_schedule.assignments:
        if a.registration_id in request.postponed:
            postponed.append(a)
        elif a.day <= request.disruption_day:
            executed.append(a)
        elif (
            first <= a.day <= last
            and (request.specialty_filter is None or regs[a.registration_id].specialty == request.specialty_filter)
        ):
            candidates.append(a)
        else:
            passthrough.append(a)
    return _Parts(tuple(executed), tuple(postponed), tuple(candidates), tuple(passthrough))


def compute_residual_availability(
    instance: Instance, old_schedule: Schedule, executed_through: int
) -> tuple[BedAvailability, ...]:
    """Bed table left for days after ``executed_through``.

    Stays of already-executed surgeries (assignment day at or before
    ``executed_through``) spill into later days and reduce those days'
    availability by one bed each.
    """
    if executed_through >= instance.horizon:
        raise ValueError("executed_through must be before the end of the horizon")
    regs = instance.registration_map()
    remaining: dict[tuple[int, int], int] = instance.bed_map()
    for a in old_schedule.assignments:
        if a.day > executed_through:
            continue
        reg = regs[a.registration_id]
        for stay in expand_stays(reg, a.day, instance.horizon):
            if stay.day <= executed_through:
                continue
            key = (stay.place, stay.day)
            remaining[key] = remaining.get(key, 0) - 1
            if remaining[key] < 0:
                raise RescheduleError(
                    "negative-availability",
                    f"executed stays exceed declared beds in ward {stay.place} on day {stay.day}",
                )
    return tuple(
        BedAvailability(ward=ward, day=day, available=count)
        for (ward, day), count in sorted(remaining.items())
    )


def _fixed_availability(request: RescheduleRequest, parts: _Parts) -> dict[tuple[int, int], int]:
    """Declared beds minus stays of every assignment the search cannot touch."""
    regs = request.instance.registration_map()
    remaining = request.instance.bed_map()
    for a in parts.executed + parts.passthrough:
        reg = regs[a.registration_id]
        for stay in expand_stays(reg, a.day, request.instance.horizon):
            key = (stay.place, stay.day)
            remaining[key] = remaining.get(key, 0) - 1
            if remaining[key] < 0:
                raise RescheduleError(
                    "negative-availability",
                    f"fixed stays exceed declared beds in ward {stay.place} on day {stay.day}",
                )
    return remaining


def residual_instance(request: RescheduleRequest) -> Instance:
    """Window-restricted instance carrying the beds left over for the search.

    Its MSS holds only the reschedulable slots and its bed table is what
    remains after executed and passed-through stays; the movable part of a
    reschedule outcome must satisfy the plain verifier on this instance.
    """
    validate_request(request)
    parts = _split(request)
    remaining = _fixed_availability(request, parts)
    first, last = request.window()
    mss = tuple(
        slot
        for slot in request.instance.mss
        if first <= slot.day <= last
        and (request.specialty_filter is None or slot.specialty == request.specialty_filter)
    )
    beds = tuple(
        BedAvailability(ward=ward, day=day, available=count)
        for (ward, day), count in sorted(remaining.items())
    )
    return Instance(
        horizon=request.instance.horizon,
        registrations=request.instance.registrations,
        mss=mss,
        capacities=request.instance.capacities,
        beds=beds,
    )


def _offset_level4(parts: _Parts, regs: dict[int, Registration]) -> int:
    """Old P1/P2 assignments already executed; they cannot reappear in the
    window, so they shift level 4 of every candidate outcome equally."""
    return sum(1 for a in parts.executed if regs[a.registration_id].priority in (1, 2))


def _compile_request(request: RescheduleRequest, parts: _Parts):
    instance = request.instance
    regs = instance.registration_map()
    capacities = instance.capacity_map()
    horizon = instance.horizon
    first, last = request.window()

    slots_sorted = sorted(
        (
            s
            for s in instance.mss
            if first <= s.day <= last
            and (request.specialty_filter is None or s.specialty == request.specialty_filter)
        ),
        key=lambda s: (s.day, s.or_id, s.session),
    )
    slot_keys = tuple((s.or_id, s.session, s.day) for s in slots_sorted)
    search_slots = tuple(
        engine.SearchSlot(s.or_id, s.session, s.day, capacities[(s.or_id, s.session)])
        for s in slots_sorted
    )
    slots_by_specialty: dict[int, list[int]] = {}
    for i, slot in enumerate(slots_sorted):
        slots_by_specialty.setdefault(slot.specialty, []).append(i)

    remaining = _fixed_availability(request, parts)
    movable = list(parts.postponed) + list(parts.candidates)
    wards = sorted({0} | {regs[a.registration_id].specialty for a in movable})
    ward_row = {ward: row for row, ward in enumerate(wards)}
    cell_avail = tuple(
        remaining.get((ward, day), 0) for ward in wards for day in range(1, horizon + 1)
    )

    base = engine.LEVEL_BASE
    search_regs = []
    reg_ids = []
    for a in movable:
        reg = regs[a.registration_id]
        is_postponed = a.registration_id in request.postponed
        unassigned = 0
        if is_postponed:
            unassigned += base**4
        if reg.priority in (1, 2):
            unassigned += base**3
        elif first <= a.day < last:
            unassigned += base**2
        elif a.day == last:
            unassigned += base
        slot_ids = slots_by_specialty.get(reg.specialty, ())
        day_costs = {
            day: abs(day - a.day)
            for day in sorted({search_slots[si].day for si in slot_ids})
        }
        ordered = sorted(
            slot_ids,
            key=lambda si: (
                day_costs[search_slots[si].day],
                search_slots[si].day,
                search_slots[si].or_id,
                search_slots[si].session,
            ),
        )
        cells_by_day = {
            day: tuple(
                ward_row[stay.place] * horizon + stay.day - 1
                for stay in expand_stays(reg, day, horizon)
            )
            for day in day_costs
        }
        search_regs.append(
            engine.SearchReg(
                reg_id=reg.id,
                priority=reg.priority,
                duration=reg.surgery_duration,
                must=is_postponed,
                unassigned_cost=unassigned,
                slots=tuple(ordered),
                slot_costs=tuple(day_costs[search_slots[si].day] for si in ordered),
                day_costs=day_costs,
                cells_by_day=cells_by_day,
            )
        )
        reg_ids.append(reg.id)

    problem = engine.SearchProblem(
        regs=tuple(search_regs),
        slots=search_slots,
        cell_avail=cell_avail,
        num_levels=4,
        has_slot_costs=True,
    )
    return problem, tuple(reg_ids), slot_keys


def dropped_registrations(request: RescheduleRequest, new_schedule: Schedule) -> frozenset[int]:
    """Previously planned window registrations the new schedule leaves out."""
    parts = _split(request)
    new_ids = new_schedule.assigned_ids()
    return frozenset(a.registration_id for a in parts.candidates if a.registration_id not in new_ids)


def _build_outcome(
    request: RescheduleRequest,
    parts: _Parts,
    reg_ids: tuple[int, ...],
    slot_keys: tuple[tuple[int, int, int], ...],
    assigned: list[int],
) -> RescheduleOutcome:
    regs = request.instance.registration_map()
    rows = list(parts.passthrough)
    placed: set[int] = set()
    for ri, si in enumerate(assigned):
        if si < 0:
            continue
        or_id, session, day = slot_keys[si]
        reg = regs[reg_ids[ri]]
        rows.append(Assignment(reg.id, reg.priority, or_id, session, day))
        placed.add(reg.id)
    rows.sort(key=lambda a: (a.day, a.or_id, a.session, a.registration_id))
    new_schedule = Schedule(assignments=tuple(rows))
    dropped = frozenset(
        a.registration_id for a in parts.candidates if a.registration_id not in placed
    )
    return RescheduleOutcome(
        new_schedule=new_schedule,
        objective=evaluate_reschedule_objective(request, new_schedule),
        dropped=dropped,
    )


def reschedule(
    request: RescheduleRequest,
    config: SolverConfig = SolverConfig(),
    sink: Callable[[RescheduleIncumbent], None] | None = None,
    *,
    should_stop: Callable[[], bool] | None = None,
) -> RescheduleOutcome:
    """Recompute the window of the plan after a disruption.

    Every postponed registration is placed (hard); raises
    :class:`RescheduleError` with code ``infeasible-postponed`` when that is
    impossible within the budget at any drop cost.
    """
    validate_request(request)
    parts = _split(request)
    problem, reg_ids, slot_keys = _compile_request(request, parts)
    for reg in problem.regs:
        if not reg.must:
            continue
        placeable = any(
            reg.duration <= problem.slots[si].capacity
            and all(problem.cell_avail[c] > 0 for c in reg.cells_by_day[problem.slots[si].day])
            for si in reg.slots
        )
        if not placeable:
            raise RescheduleError(
                "infeasible-postponed",
                f"postponed registration {reg.reg_id} fits no session in the window",
            )
    started = time.monotonic()

    def on_incumbent(assigned: list[int], objective: int) -> None:
        if sink is None or not config.emit_incumbents:
            return
        outcome = _build_outcome(request, parts, reg_ids, slot_keys, assigned)
        sink(
            RescheduleIncumbent(
                new_schedule=outcome.new_schedule,
                objective=outcome.objective,
                elapsed=time.monotonic() - started,
            )
        )

    result = engine.run_search(
        problem,
        seed=config.seed,
        time_limit=None if config.iteration_budget is not None else config.time_limit,
        iteration_budget=config.iteration_budget,
        max_stall_iterations=config.max_stall_iterations,
        on_incumbent=on_incumbent,
        should_stop=should_stop,
    )

    must_missing = result.levels(problem)[0]
    if must_missing > 0:
        raise RescheduleError(
            "infeasible-postponed",
            f"{must_missing} postponed registrations could not be placed in the window",
        )
    return _build_outcome(request, parts, reg_ids, slot_keys, result.assigned)


def evaluate_reschedule_objective(request: RescheduleRequest, new_schedule: Schedule) -> RescheduleObjective:
    """Four-level cost of a new schedule relative to the old one.

    Level 4 counts old P1/P2 assignments missing from the new schedule
    (including the constant offset of already-executed ones), levels 3 and 2
    count missing old P3 assignments by original day as described in the
    module docstring, and level 1 sums day shifts over registrations present
    in both schedules.
    """
    regs = request.instance.registration_map()
    first, last = request.window()
    new_by_reg = new_schedule.by_registration()
    level4 = level3 = level2 = level1 = 0
    for a in request.old_schedule.assignments:
        reg = regs[a.registration_id]
        new_assignment = new_by_reg.get(a.registration_id)
        if new_assignment is None:
            if reg.priority in (1, 2):
                level4 += 1
            elif first <= a.day < last:
                level3 += 1
            elif a.day == last:
                level2 += 1
        else:
            level1 += abs(new_assignment.day - a.day)
    return RescheduleObjective(level4=level4, level3=level3, level2=level2, level1=level1)
