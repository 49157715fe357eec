"""Deterministic first-improvement local search over OR-session assignments.

The scheduling and rescheduling optimizers reduce to one skeleton: place
registrations into specialty-compatible sessions subject to session minutes
and daily ward/ICU bed caps, minimizing a small lexicographic cost vector;
"must" registrations are not allowed to stay unplaced.  Cost vectors are
folded into single integers (base ``2**21`` per level, most significant
level first, with the must-count as the top digit) so integer comparison is
lexicographic comparison.

Search: greedy construction in cost order, then first-improvement sweeps
(direct inserts, day relocations, ejection chains evicting at most two
registrations), restarting from a permuted priority-stable construction
order when a sweep stalls.  Given a seed and an iteration budget the run is
fully deterministic; an iteration is one per-registration move attempt.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Sequence

LEVEL_BASE = 1 << 21


def encode_levels(levels: Sequence[int]) -> int:
    value = 0
    for level in levels:
        value = value * LEVEL_BASE + level
    return value


def decode_levels(value: int, count: int) -> tuple[int, ...]:
    levels = []
    for _ in range(count):
        levels.append(value % LEVEL_BASE)
        value //= LEVEL_BASE
    return tuple(reversed(levels))


@dataclass(frozen=True)
class SearchReg:
    """Engine view of one registration.

    ``slots`` is the preference-ordered tuple of compatible slot indices and
    ``slot_costs`` the aligned assigned-cost (already level-encoded) of each;
    ``day_costs`` maps candidate surgery days to the same cost for O(1)
    lookup, and ``cells_by_day`` maps them to occupancy cell indices.
    """

    reg_id: int
    priority: int
    duration: int
    must: bool
    unassigned_cost: int
    slots: tuple[int, ...]
    slot_costs: tuple[int, ...]
    day_costs: dict[int, int]
    cells_by_day: dict[int, tuple[int, ...]]


@dataclass(frozen=True)
class SearchSlot:
    or_id: int
    session: int
    day: int
    capacity: int


@dataclass(frozen=True)
class SearchProblem:
    regs: tuple[SearchReg, ...]
    slots: tuple[SearchSlot, ...]
    cell_avail: tuple[int, ...]
    num_levels: int
    has_slot_costs: bool


@dataclass
class SearchResult:
    assigned: list[int]
    objective: int
    iterations: int
    restarts: int
    elapsed: float

    def levels(self, problem: SearchProblem) -> tuple[int, ...]:
        """(must_unassigned, level_k, ..., level_1) decoded from the objective."""
        return decode_levels(self.objective, problem.num_levels + 1)


class BudgetExhausted(Exception):
    pass


class _Budget:
    __slots__ = ("limit", "deadline", "should_stop", "spent")

    def __init__(self, limit: int | None, deadline: float | None, should_stop: Callable[[], bool] | None):
        self.limit = limit
        self.deadline = deadline
        self.should_stop = should_stop
        self.spent = 0

    def tick(self) -> None:
        self.spent += 1
        if self.limit is not None and self.spent >= self.limit:
            raise BudgetExhausted
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise BudgetExhausted
        if self.should_stop is not None and (self.spent & 31) == 0 and self.should_stop():
            raise BudgetExhausted


class State:
    """Mutable assignment state with incremental objective bookkeeping."""

    __slots__ = ("problem", "assigned", "load", "occ", "slot_members", "occupants", "objective")

    def __init__(self, problem: SearchProblem):
        self.problem = problem
        self.assigned = [-1] * len(problem.regs)
        self.load = [0] * len(problem.slots)
        self.occ = [0] * len(problem.cell_avail)
        self.slot_members: list[dict[int, None]] = [{} for _ in problem.slots]
        self.occupants: list[dict[int, None]] = [{} for _ in problem.cell_avail]
        self.objective = sum(reg.unassigned_cost for reg in problem.regs)

    def fits(self, ri: int, si: int) -> bool:
        problem = self.problem
        reg = problem.regs[ri]
        slot = problem.slots[si]
        if self.load[si] + reg.duration > slot.capacity:
            return False
        avail = problem.cell_avail
        occ = self.occ
        for cell in reg.cells_by_day[slot.day]:
            if occ[cell] >= avail[cell]:
                return False
        return True

    def place(self, ri: int, si: int) -> None:
        reg = self.problem.regs[ri]
        slot = self.problem.slots[si]
        self.assigned[ri] = si
        self.load[si] += reg.duration
        self.slot_members[si][ri] = None
        for cell in reg.cells_by_day[slot.day]:
            self.occ[cell] += 1
            self.occupants[cell][ri] = None
        self.objective += reg.day_costs[slot.day] - reg.unassigned_cost

    def remove(self, ri: int) -> None:
        si = self.assigned[ri]
        reg = self.problem.regs[ri]
        slot = self.problem.slots[si]
        self.assigned[ri] = -1
        self.load[si] -= reg.duration
        del self.slot_members[si][ri]
        for cell in reg.cells_by_day[slot.day]:
            self.occ[cell] -= 1
            del self.occupants[cell][ri]
        self.objective += reg.unassigned_cost - reg.day_costs[slot.day]

    def unassigned_in_cost_order(self) -> list[int]:
        pending = [ri for ri, si in enumerate(self.assigned) if si == -1]
        pending.sort(key=lambda ri: (-self.problem.regs[ri].unassigned_cost, self.problem.regs[ri].reg_id))
        return pending


def base_order(problem: SearchProblem) -> list[int]:
    order = list(range(len(problem.regs)))
    order.sort(key=lambda ri: (-problem.regs[ri].unassigned_cost, problem.regs[ri].reg_id))
    return order


def shuffled_order(problem: SearchProblem, rng: random.Random) -> list[int]:
    """Permutation that shuffles registrations only within equal-cost tiers."""
    tiers: dict[int, list[int]] = {}
    for ri in base_order(problem):
        tiers.setdefault(problem.regs[ri].unassigned_cost, []).append(ri)
    order: list[int] = []
    for cost in sorted(tiers, reverse=True):
        tier = tiers[cost]
        rng.shuffle(tier)
        order.extend(tier)
    return order


def construct_into(
    state: State, order: Sequence[int], budget: _Budget, rng: random.Random | None = None
) -> None:
    """Greedy first-fit construction in the given registration order.

    With an ``rng`` each registration scans its slot preference from a
    random offset, which diversifies restarts beyond what reordering the
    registrations alone can reach.
    """
    for ri in order:
        budget.tick()
        reg = state.problem.regs[ri]
        slots = reg.slots
        if rng is not None and len(slots) > 1:
            offset = rng.randrange(len(slots))
            slots = slots[offset:] + slots[:offset]
        for si in slots:
            if state.fits(ri, si):
                state.place(ri, si)
                break


def _eject_candidates(state: State, ri: int, si: int, pool_cap: int = 10, pair_cap: int = 6) -> list[tuple[int, ...]]:
    problem = state.problem
    reg = problem.regs[ri]
    slot = problem.slots[si]
    shortfall = state.load[si] + reg.duration - slot.capacity
    blocked = [c for c in reg.cells_by_day[slot.day] if state.occ[c] >= problem.cell_avail[c]]

    pool: list[int] = []
    seen: set[int] = set()
    if shortfall > 0:
        for rj in state.slot_members[si]:
            pool.append(rj)
            seen.add(rj)
    for cell in blocked:
        for rj in state.occupants[cell]:
            if rj not in seen:
                pool.append(rj)
                seen.add(rj)
    pool.sort(key=lambda rj: (problem.regs[rj].unassigned_cost, problem.regs[rj].duration, problem.regs[rj].reg_id))
    pool = pool[:pool_cap]

    def resolves(members: tuple[int, ...]) -> bool:
        if shortfall > 0:
            freed = sum(problem.regs[rj].duration for rj in members if state.assigned[rj] == si)
            if freed < shortfall:
                return False
        for cell in blocked:
            if not any(rj in state.occupants[cell] for rj in members):
                return False
        return True

    candidates = [(rj,) for rj in pool if resolves((rj,))]
    for i in range(min(len(pool), pair_cap)):
        for j in range(i + 1, min(len(pool), pair_cap)):
            pair = (pool[i], pool[j])
            if resolves(pair):
                candidates.append(pair)
    return candidates


def _try_eject_insert(state: State, ri: int, budget: _Budget) -> bool:
    """Insert ``ri`` by evicting up to two registrations, evicted ones being
    reinserted first-fit; commits only on strict objective improvement."""
    problem = state.problem
    reg = problem.regs[ri]
    base_objective = state.objective
    for si in reg.slots:
        if state.fits(ri, si):
            state.place(ri, si)
            return True
        for members in _eject_candidates(state, ri, si):
            budget.tick()
            removed = [(rj, state.assigned[rj]) for rj in members]
            for rj, _ in removed:
                state.remove(rj)
            if not state.fits(ri, si):
                for rj, old in removed:
                    state.place(rj, old)
                continue
            state.place(ri, si)
            for rj, _ in removed:
                for sj in problem.regs[rj].slots:
                    if state.fits(rj, sj):
                        state.place(rj, sj)
                        break
            if state.objective < base_objective:
                return True
            state.remove(ri)
            for rj, old in removed:
                if state.assigned[rj] != -1:
                    state.remove(rj)
                state.place(rj, old)
    return False


def sweep(state: State, budget: _Budget, on_accept: Callable[[], None], stall_limit: int) -> bool:
    """One first-improvement pass; returns whether any move was accepted.

    Aborts early once ``stall_limit`` iterations pass without an accepted
    move, so a barren tail hands control back to the restart loop.
    """
    problem = state.problem
    improved = False
    last_accept = budget.spent

    def accepted() -> None:
        nonlocal improved, last_accept
        improved = True
        last_accept = budget.spent
        on_accept()

    def stalled() -> bool:
        return budget.spent - last_accept >= stall_limit

    for ri in state.unassigned_in_cost_order():
        if stalled():
            return improved
        budget.tick()
        reg = problem.regs[ri]
        for si in reg.slots:
            if state.fits(ri, si):
                state.place(ri, si)
                accepted()
                break

    if problem.has_slot_costs:
        for ri in range(len(problem.regs)):
            si = state.assigned[ri]
            if si == -1:
                continue
            reg = problem.regs[ri]
            current_cost = reg.day_costs[problem.slots[si].day]
            if current_cost == 0:
                continue
            if stalled():
                return improved
            budget.tick()
            state.remove(ri)
            target = -1
            for k, sj in enumerate(reg.slots):
                if reg.slot_costs[k] >= current_cost:
                    break
                if sj != si and state.fits(ri, sj):
                    target = sj
                    break
            state.place(ri, target if target != -1 else si)
            if target != -1:
                accepted()

    for ri in state.unassigned_in_cost_order():
        if stalled():
            return improved
        budget.tick()
        if _try_eject_insert(state, ri, budget):
            accepted()

    return improved


def run_search(
    problem: SearchProblem,
    *,
    seed: int,
    time_limit: float | None = None,
    iteration_budget: int | None = None,
    max_stall_iterations: int = 2000,
    on_incumbent: Callable[[list[int], int], None] | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> SearchResult:
    """Minimize the encoded objective; returns the best state visited.

    ``on_incumbent`` fires whenever the best *feasible* (all must-regs
    placed) objective strictly improves, receiving a copy of the
    assignment vector and the encoded objective.
    """
    started = time.monotonic()
    deadline = started + time_limit if time_limit is not None else None
    rng = random.Random(seed)
    budget = _Budget(iteration_budget, deadline, should_stop)

    best_assigned: list[int] = [-1] * len(problem.regs)
    best_objective = sum(reg.unassigned_cost for reg in problem.regs)
    must_threshold = LEVEL_BASE ** problem.num_levels
    restarts = 0

    state = State(problem)

    def commit() -> None:
        nonlocal best_objective, best_assigned
        if state.objective < best_objective:
            best_objective = state.objective
            best_assigned = list(state.assigned)
            if on_incumbent is not None and best_objective < must_threshold:
                on_incumbent(list(best_assigned), best_objective)

    try:
        construct_into(state, base_order(problem), budget)
        commit()
        while True:
            improved = sweep(state, budget, commit, max_stall_iterations)
            if not improved:
                restarts += 1
                state = State(problem)
                construct_into(state, shuffled_order(problem, rng), budget, rng)
                commit()
    except BudgetExhausted:
        commit()

    return SearchResult(
        assigned=best_assigned,
        objective=best_objective,
        iterations=budget.spent,
        restarts=restarts,
        elapsed=time.monotonic() - started,
    )
