"""Anytime lexicographic scheduler.

Builds feasible schedules (every priority-1 registration placed, session
minutes and bed caps respected) and keeps improving the unassigned-P2 /
unassigned-P3 cost vector until the time or iteration budget expires,
emitting each strictly better incumbent to an optional sink.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable

from . import engine
from .model import (
    ICU_WARD,
    Assignment,
    Instance,
    Schedule,
    expand_stays,
    validate_instance,
)
from .verify import ObjectiveVector


class SolveError(Exception):
    """Solve failure with a machine-readable ``code``.

    Infeasibility errors carry the ``proof`` that triggered them.
    """

    def __init__(self, code: str, message: str, proof: dict[str, object] | None = None):
        super().__init__(message)
        self.code = code
        self.proof = proof


@dataclass(frozen=True)
class SolverConfig:
    """``iteration_budget`` replaces the wall clock when set, which makes
    runs machine-independent and bit-for-bit reproducible."""

    time_limit: float = 60.0
    seed: int = 0
    max_stall_iterations: int = 2000
    emit_incumbents: bool = True
    iteration_budget: int | None = None


@dataclass(frozen=True)
class Incumbent:
    schedule: Schedule
    objective: ObjectiveVector
    elapsed: float


@dataclass(frozen=True)
class SolveOutcome:
    best_schedule: Schedule
    objective: ObjectiveVector
    proved_optimal: bool
    incumbents_emitted: int
    elapsed: float


@dataclass(frozen=True)
class CompiledInstance:
    """Engine-shaped view of an instance plus the maps back to model ids."""

    problem: engine.SearchProblem
    reg_ids: tuple[int, ...]
    reg_index: dict[int, int]
    slot_keys: tuple[tuple[int, int, int], ...]
    slot_index: dict[tuple[int, int, int], int]
    priorities: tuple[int, ...]
    wards: tuple[int, ...]
    horizon: int

    def cell_location(self, cell: int) -> tuple[int, int]:
        """(ward, day) addressed by an occupancy cell index."""
        return self.wards[cell // self.horizon], cell % self.horizon + 1


def compile_instance(instance: Instance) -> CompiledInstance:
    capacities = instance.capacity_map()
    beds = instance.bed_map()
    horizon = instance.horizon

    slots_sorted = sorted(instance.mss, key=lambda s: (s.day, s.or_id, s.session))
    slot_keys = tuple((s.or_id, s.session, s.day) for s in slots_sorted)
    slot_index = {key: i for i, key in enumerate(slot_keys)}
    search_slots = tuple(
        engine.SearchSlot(s.or_id, s.session, s.day, capacities[(s.or_id, s.session)])
        for s in slots_sorted
    )
    slots_by_specialty: dict[int, list[int]] = {}
    for i, slot in enumerate(slots_sorted):
        slots_by_specialty.setdefault(slot.specialty, []).append(i)

    wards = sorted({ICU_WARD} | {r.specialty for r in instance.registrations})
    ward_row = {ward: row for row, ward in enumerate(wards)}
    cell_avail = tuple(
        beds.get((ward, day), 0) for ward in wards for day in range(1, horizon + 1)
    )

    def cell(ward: int, day: int) -> int:
        return ward_row[ward] * horizon + day - 1

    unassigned_cost_by_priority = {
        1: engine.LEVEL_BASE ** 2,
        2: engine.LEVEL_BASE,
        3: 1,
    }

    regs = []
    for reg in instance.registrations:
        slot_ids = tuple(slots_by_specialty.get(reg.specialty, ()))
        days = sorted({search_slots[si].day for si in slot_ids})
        cells_by_day = {
            day: tuple(cell(stay.place, stay.day) for stay in expand_stays(reg, day, horizon))
            for day in days
        }
        regs.append(
            engine.SearchReg(
                reg_id=reg.id,
                priority=reg.priority,
                duration=reg.surgery_duration,
                must=reg.priority == 1,
                unassigned_cost=unassigned_cost_by_priority[reg.priority],
                slots=slot_ids,
                slot_costs=(0,) * len(slot_ids),
                day_costs={day: 0 for day in days},
                cells_by_day=cells_by_day,
            )
        )

    problem = engine.SearchProblem(
        regs=tuple(regs),
        slots=search_slots,
        cell_avail=cell_avail,
        num_levels=2,
        has_slot_costs=False,
    )
    reg_ids = tuple(reg.id for reg in instance.registrations)
    return CompiledInstance(
        problem=problem,
        reg_ids=reg_ids,
        reg_index={reg_id: i for i, reg_id in enumerate(reg_ids)},
        slot_keys=slot_keys,
        slot_index=slot_index,
        priorities=tuple(reg.priority for reg in instance.registrations),
        wards=tuple(wards),
        horizon=horizon,
    )


def assignment_from_engine(compiled: CompiledInstance, assigned: list[int]) -> Schedule:
    rows = []
    for ri, si in enumerate(assigned):
        if si < 0:
            continue
        or_id, session, day = compiled.slot_keys[si]
        rows.append(Assignment(compiled.reg_ids[ri], compiled.priorities[ri], or_id, session, day))
    rows.sort(key=lambda a: (a.day, a.or_id, a.session, a.registration_id))
    return Schedule(assignments=tuple(rows))


def _require_valid(instance: Instance) -> None:
    report = validate_instance(instance)
    if not report.ok:
        codes = sorted({issue.code for issue in report.issues})
        raise ValueError(f"instance fails validation: {', '.join(codes)}")


def p1_infeasibility_proof(compiled: CompiledInstance) -> dict[str, object] | None:
    """A quick certificate that not all P1 registrations can be placed.

    Two sound (not complete) arguments: a P1 registration with no session it
    could ever occupy, and a bed cell that more P1 registrations are forced
    to occupy (under every surgery day open to them) than it has beds.
    """
    problem = compiled.problem
    forced: dict[int, list[int]] = {}
    for reg in problem.regs:
        if not reg.must:
            continue
        usable_days: set[int] = set()
        for si in reg.slots:
            slot = problem.slots[si]
            if reg.duration > slot.capacity:
                continue
            if all(problem.cell_avail[c] > 0 for c in reg.cells_by_day[slot.day]):
                usable_days.add(slot.day)
        if not usable_days:
            return {
                "reason": "unplaceable-registration",
                "registration_id": reg.reg_id,
            }
        always = set.intersection(*(set(reg.cells_by_day[day]) for day in usable_days))
        for cell in always:
            forced.setdefault(cell, []).append(reg.reg_id)
    for cell, reg_ids in forced.items():
        if len(reg_ids) > problem.cell_avail[cell]:
            ward, day = compiled.cell_location(cell)
            return {
                "reason": "forced-cell-overflow",
                "ward": ward,
                "day": day,
                "available": problem.cell_avail[cell],
                "registration_ids": sorted(reg_ids),
            }
    return None


def solve(
    instance: Instance,
    config: SolverConfig = SolverConfig(),
    sink: Callable[[Incumbent], None] | None = None,
    *,
    should_stop: Callable[[], bool] | None = None,
) -> SolveOutcome:
    """Schedule the instance, streaming strictly improving incumbents.

    Raises :class:`SolveError` with code ``infeasible-p1`` when all
    priority-1 registrations provably cannot be placed, and with code
    ``timeout-no-solution`` when the budget expired before the search
    managed to place them all.
    """
    _require_valid(instance)
    compiled = compile_instance(instance)
    proof = p1_infeasibility_proof(compiled)
    if proof is not None:
        raise SolveError(
            "infeasible-p1",
            f"priority-1 registrations cannot all be placed: {proof}",
            proof=proof,
        )
    started = time.monotonic()

    emitted = 0

    def on_incumbent(assigned: list[int], objective: int) -> None:
        nonlocal emitted
        emitted += 1
        if sink is not None and config.emit_incumbents:
            _, p2, p3 = engine.decode_levels(objective, 3)
            sink(
                Incumbent(
                    schedule=assignment_from_engine(compiled, assigned),
                    objective=ObjectiveVector(p2, p3),
                    elapsed=time.monotonic() - started,
                )
            )

    result = engine.run_search(
        compiled.problem,
        seed=config.seed,
        time_limit=None if config.iteration_budget is not None else config.time_limit,
        iteration_budget=config.iteration_budget,
        max_stall_iterations=config.max_stall_iterations,
        on_incumbent=on_incumbent,
        should_stop=should_stop,
    )

    must_missing, p2, p3 = result.levels(compiled.problem)
    if must_missing > 0:
        raise SolveError(
            "timeout-no-solution",
            f"budget expired with {must_missing} priority-1 registrations unplaced",
        )
    objective = ObjectiveVector(p2, p3)
    return SolveOutcome(
        best_schedule=assignment_from_engine(compiled, result.assigned),
        objective=objective,
        proved_optimal=p2 == 0 and p3 == 0,
        incumbents_emitted=emitted,
        elapsed=result.elapsed,
    )


def construct_initial(instance: Instance, rng: random.Random | None = None) -> Schedule:
    """Greedy priority-order construction; P1 gaps are left for repair."""
    _require_valid(instance)
    compiled = compile_instance(instance)
    budget = engine._Budget(None, None, None)
    state = engine.State(compiled.problem)
    order = (
        engine.base_order(compiled.problem)
        if rng is None
        else engine.shuffled_order(compiled.problem, rng)
    )
    engine.construct_into(state, order, budget)
    return assignment_from_engine(compiled, state.assigned)


def improve(
    schedule: Schedule,
    instance: Instance,
    rng: random.Random | None = None,
    budget: int = 50_000,
) -> Schedule:
    """Local search from an existing schedule; never returns a worse one.

    The ``rng`` only drives restart permutations after the search reaches a
    local optimum within the budget.
    """
    _require_valid(instance)
    compiled = compile_instance(instance)
    state = engine.State(compiled.problem)
    for assignment in schedule.assignments:
        ri = compiled.reg_index.get(assignment.registration_id)
        si = compiled.slot_index.get((assignment.or_id, assignment.session, assignment.day))
        if ri is not None and si is not None and state.assigned[ri] == -1:
            state.place(ri, si)

    best_assigned = list(state.assigned)
    best_objective = state.objective
    tick_budget = engine._Budget(budget, None, None)
    rng = rng or random.Random(0)

    def commit() -> None:
        nonlocal best_assigned, best_objective
        if state.objective < best_objective:
            best_objective = state.objective
            best_assigned = list(state.assigned)

    try:
        while engine.sweep(state, tick_budget, commit, stall_limit=budget):
            pass
    except engine.BudgetExhausted:
        commit()
    return assignment_from_engine(compiled, best_assigned)
