"""Exact exhaustive reference solvers for tiny instances.

These enumerate every assignment a schedule or reschedule could make,
filtered by the hard constraints, and return a lexicographic optimum.  They
share nothing with the local-search engine except the data model, so they
can serve as independent ground truth in property tests.  Pruning on the
objective bound can be disabled (``prune=False``) to assert that the
branch-and-bound variant is exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Assignment, Instance, Schedule, expand_stays
from .reschedule import (
    RescheduleError,
    RescheduleObjective,
    RescheduleRequest,
    evaluate_reschedule_objective,
    validate_request,
)
from .solver import SolveError
from .verify import ObjectiveVector


class OracleLimitError(Exception):
    code = "limits-exceeded"


@dataclass(frozen=True)
class OracleLimits:
    max_registrations: int = 8
    max_slots: int = 8
    max_states: int = 5_000_000


class _Nodes:
    __slots__ = ("count", "cap")

    def __init__(self, cap: int):
        self.count = 0
        self.cap = cap

    def visit(self) -> None:
        self.count += 1
        if self.count > self.cap:
            raise OracleLimitError(f"enumeration exceeded {self.cap} states")


def brute_force_schedule(
    instance: Instance,
    limits: OracleLimits = OracleLimits(),
    *,
    prune: bool = True,
) -> tuple[ObjectiveVector, Schedule]:
    """Lexicographic optimum over all feasible schedules of a tiny instance."""
    if len(instance.registrations) > limits.max_registrations:
        raise OracleLimitError(f"{len(instance.registrations)} registrations exceed the oracle limit")
    if len(instance.mss) > limits.max_slots:
        raise OracleLimitError(f"{len(instance.mss)} slots exceed the oracle limit")

    slots = sorted(instance.mss, key=lambda s: (s.day, s.or_id, s.session))
    capacities = instance.capacity_map()
    slot_capacity = [capacities[(s.or_id, s.session)] for s in slots]
    beds = instance.bed_map()
    regs = sorted(instance.registrations, key=lambda r: r.id)
    compatible = [
        [i for i, slot in enumerate(slots) if slot.specialty == reg.specialty]
        for reg in regs
    ]
    stay_cells = [
        {
            day: tuple((stay.place, stay.day) for stay in expand_stays(reg, day, instance.horizon))
            for day in sorted({slots[i].day for i in compatible[k]})
        }
        for k, reg in enumerate(regs)
    ]

    nodes = _Nodes(limits.max_states)
    load = [0] * len(slots)
    occupancy: dict[tuple[int, int], int] = {}
    choice: list[int] = [-1] * len(regs)
    best_cost: list[tuple[int, int] | None] = [None]
    best_choice: list[list[int]] = [[]]

    def feasible(k: int, si: int) -> bool:
        reg = regs[k]
        if load[si] + reg.surgery_duration > slot_capacity[si]:
            return False
        for cell in stay_cells[k][slots[si].day]:
            if occupancy.get(cell, 0) >= beds.get(cell, 0):
                return False
        return True

    def descend(k: int, p2: int, p3: int) -> None:
        nodes.visit()
        if prune and best_cost[0] is not None and (p2, p3) >= best_cost[0]:
            return
        if k == len(regs):
            if best_cost[0] is None or (p2, p3) < best_cost[0]:
                best_cost[0] = (p2, p3)
                best_choice[0] = list(choice)
            return
        reg = regs[k]
        for si in compatible[k]:
            if not feasible(k, si):
                continue
            load[si] += reg.surgery_duration
            for cell in stay_cells[k][slots[si].day]:
                occupancy[cell] = occupancy.get(cell, 0) + 1
            choice[k] = si
            descend(k + 1, p2, p3)
            choice[k] = -1
            load[si] -= reg.surgery_duration
            for cell in stay_cells[k][slots[si].day]:
                occupancy[cell] -= 1
        if reg.priority != 1:
            descend(k + 1, p2 + (reg.priority == 2), p3 + (reg.priority == 3))

    descend(0, 0, 0)
    if best_cost[0] is None:
        raise SolveError("infeasible-p1", "no feasible placement of all priority-1 registrations exists")

    assignments = []
    for k, si in enumerate(best_choice[0]):
        if si >= 0:
            slot = slots[si]
            assignments.append(Assignment(regs[k].id, regs[k].priority, slot.or_id, slot.session, slot.day))
    assignments.sort(key=lambda a: (a.day, a.or_id, a.session, a.registration_id))
    return ObjectiveVector(*best_cost[0]), Schedule(assignments=tuple(assignments))


def brute_force_reschedule(
    request: RescheduleRequest,
    limits: OracleLimits = OracleLimits(),
    *,
    prune: bool = True,
) -> tuple[RescheduleObjective, Schedule]:
    """Exact optimum of the four-level reschedule objective.

    Derives the residual problem (fixed stays, movable registrations,
    window slots) by its own recount rather than through the rescheduler.
    """
    validate_request(request)
    instance = request.instance
    regs_by_id = instance.registration_map()
    first, last = request.window()

    executed, movable, passthrough = [], [], []
    for a in request.old_schedule.assignments:
        reg = regs_by_id[a.registration_id]
        if a.registration_id in request.postponed:
            movable.append(a)
        elif a.day <= request.disruption_day:
            executed.append(a)
        elif first <= a.day <= last and (
            request.specialty_filter is None or reg.specialty == request.specialty_filter
        ):
            movable.append(a)
        else:
            passthrough.append(a)
    movable.sort(key=lambda a: a.registration_id)

    slots = sorted(
        (
            s
            for s in instance.mss
            if first <= s.day <= last
            and (request.specialty_filter is None or s.specialty == request.specialty_filter)
        ),
        key=lambda s: (s.day, s.or_id, s.session),
    )
    if len(movable) > limits.max_registrations:
        raise OracleLimitError(f"{len(movable)} movable registrations exceed the oracle limit")
    if len(slots) > limits.max_slots:
        raise OracleLimitError(f"{len(slots)} window slots exceed the oracle limit")

    capacities = instance.capacity_map()
    slot_capacity = [capacities[(s.or_id, s.session)] for s in slots]
    beds = instance.bed_map()
    for a in executed + passthrough:
        reg = regs_by_id[a.registration_id]
        for stay in expand_stays(reg, a.day, instance.horizon):
            key = (stay.place, stay.day)
            beds[key] = beds.get(key, 0) - 1
            if beds[key] < 0:
                raise RescheduleError(
                    "negative-availability",
                    f"fixed stays exceed declared beds in ward {stay.place} on day {stay.day}",
                )

    compatible = [
        [i for i, slot in enumerate(slots) if slot.specialty == regs_by_id[a.registration_id].specialty]
        for a in movable
    ]
    stay_cells = [
        {
            day: tuple(
                (stay.place, stay.day)
                for stay in expand_stays(regs_by_id[a.registration_id], day, instance.horizon)
            )
            for day in sorted({slots[i].day for i in compatible[k]})
        }
        for k, a in enumerate(movable)
    ]

    def drop_cost(a: Assignment) -> tuple[int, int, int, int]:
        reg = regs_by_id[a.registration_id]
        if reg.priority in (1, 2):
            return (1, 0, 0, 0)
        if first <= a.day < last:
            return (0, 1, 0, 0)
        if a.day == last:
            return (0, 0, 1, 0)
        return (0, 0, 0, 0)

    is_postponed = [a.registration_id in request.postponed for a in movable]
    min_shift = [
        min((abs(slots[i].day - a.day) for i in compatible[k]), default=0)
        for k, a in enumerate(movable)
    ]
    # Guaranteed future level-1 cost: postponed registrations must be placed.
    tail_bound = [0] * (len(movable) + 1)
    for k in range(len(movable) - 1, -1, -1):
        tail_bound[k] = tail_bound[k + 1] + (min_shift[k] if is_postponed[k] else 0)

    nodes = _Nodes(limits.max_states)
    load = [0] * len(slots)
    occupancy: dict[tuple[int, int], int] = {}
    choice: list[int] = [-1] * len(movable)
    best_cost: list[tuple[int, int, int, int] | None] = [None]
    best_choice: list[list[int]] = [[]]

    def feasible(k: int, si: int) -> bool:
        reg = regs_by_id[movable[k].registration_id]
        if load[si] + reg.surgery_duration > slot_capacity[si]:
            return False
        for cell in stay_cells[k][slots[si].day]:
            if occupancy.get(cell, 0) >= beds.get(cell, 0):
                return False
        return True

    def descend(k: int, cost: tuple[int, int, int, int]) -> None:
        nodes.visit()
        if prune and best_cost[0] is not None:
            bound = (cost[0], cost[1], cost[2], cost[3] + tail_bound[k])
            if bound >= best_cost[0]:
                return
        if k == len(movable):
            if best_cost[0] is None or cost < best_cost[0]:
                best_cost[0] = cost
                best_choice[0] = list(choice)
            return
        a = movable[k]
        reg = regs_by_id[a.registration_id]
        for si in compatible[k]:
            if not feasible(k, si):
                continue
            load[si] += reg.surgery_duration
            for cell in stay_cells[k][slots[si].day]:
                occupancy[cell] = occupancy.get(cell, 0) + 1
            choice[k] = si
            shift = abs(slots[si].day - a.day)
            descend(k + 1, (cost[0], cost[1], cost[2], cost[3] + shift))
            choice[k] = -1
            load[si] -= reg.surgery_duration
            for cell in stay_cells[k][slots[si].day]:
                occupancy[cell] -= 1
        if not is_postponed[k]:
            extra = drop_cost(a)
            descend(k + 1, tuple(c + e for c, e in zip(cost, extra)))

    descend(0, (0, 0, 0, 0))
    if best_cost[0] is None:
        raise RescheduleError(
            "infeasible-postponed", "no placement of the postponed registrations exists"
        )

    rows = list(passthrough)
    for k, si in enumerate(best_choice[0]):
        if si >= 0:
            slot = slots[si]
            reg = regs_by_id[movable[k].registration_id]
            rows.append(Assignment(reg.id, reg.priority, slot.or_id, slot.session, slot.day))
    rows.sort(key=lambda a: (a.day, a.or_id, a.session, a.registration_id))
    schedule = Schedule(assignments=tuple(rows))

    objective = evaluate_reschedule_objective(request, schedule)
    offset = sum(1 for a in executed if regs_by_id[a.registration_id].priority in (1, 2))
    tallied = (best_cost[0][0] + offset, *best_cost[0][1:])
    assert (objective.level4, objective.level3, objective.level2, objective.level1) == tallied
    return objective, schedule
