"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s``.  The benchmark criteria
use the real 60-second wall-clock regime and take roughly twenty minutes on
two cores; everything else runs on iteration budgets and is
machine-independent.
"""

from __future__ import annotations

import collections
import time
from concurrent.futures import ProcessPoolExecutor

import pytest

from orsched.cli import bench_one
from orsched.fileio import write_instance, write_schedule
from orsched.generate import generate_instance, metadata_for, scenario
from orsched.model import expand_stays, Instance
from orsched.oracle import brute_force_reschedule, brute_force_schedule
from orsched.reschedule import RescheduleError, RescheduleRequest, reschedule
from orsched.solver import SolveError, SolverConfig, solve
from orsched.verify import check_schedule

from conftest import random_tiny_instance
from test_reschedule import TINY_LIMITS, random_tiny_request

TIME_LIMIT = 60.0
SEEDS = range(10)
WORKERS = 2


def report(name: str, passed: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f" - {detail}"
    print(line, flush=True)
    assert passed, line


def independently_certified_infeasible(instance: Instance) -> bool:
    """Re-derives, from the data model alone, a bed cell that more P1
    registrations are forced to occupy than it can hold."""
    beds = instance.bed_map()
    capacities = instance.capacity_map()
    slots_by_specialty: dict[int, list] = collections.defaultdict(list)
    for slot in instance.mss:
        slots_by_specialty[slot.specialty].append(slot)
    forced_counts: collections.Counter = collections.Counter()
    for reg in instance.registrations:
        if reg.priority != 1:
            continue
        day_cells = []
        for slot in slots_by_specialty.get(reg.specialty, []):
            if reg.surgery_duration > capacities[(slot.or_id, slot.session)]:
                continue
            cells = {
                (stay.place, stay.day)
                for stay in expand_stays(reg, slot.day, instance.horizon)
            }
            if any(beds.get(cell, 0) < 1 for cell in cells):
                continue
            day_cells.append(cells)
        if not day_cells:
            return True
        for cell in set.intersection(*day_cells):
            forced_counts[cell] += 1
    return any(count > beds.get(cell, 0) for cell, count in forced_counts.items())


@pytest.fixture(scope="module")
def benchmark_rows():
    jobs = [(name, 5, seed, TIME_LIMIT, None) for name in ("A", "B", "C") for seed in SEEDS]
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        rows = list(pool.map(bench_one, *zip(*jobs)))
    grouped: dict[str, list[dict]] = {"A": [], "B": [], "C": []}
    for (name, _, _, _, _), row in zip(jobs, rows):
        grouped[name].append(row)
    return grouped


@pytest.fixture(scope="module")
def scalability_rows():
    jobs = [("A", days, 0, TIME_LIMIT, None) for days in (1, 3, 7, 15)]
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        rows = list(pool.map(bench_one, *zip(*jobs)))
    return dict(zip((1, 3, 7, 15), rows))


class TestFeasibilitySuite:
    def test_every_run_feasible_or_certified(self, benchmark_rows):
        solved = 0
        certified = 0
        problems = []
        for name, rows in benchmark_rows.items():
            for row in rows:
                if row["status"] == "solved":
                    solved += 1
                    p1_assigned, p1_total = row["assigned"]["p1"]
                    if p1_assigned != p1_total:
                        problems.append(f"{name}/{row['seed']}: P1 {p1_assigned}/{p1_total}")
                    if row["elapsed"] > TIME_LIMIT + 2:
                        problems.append(f"{name}/{row['seed']}: took {row['elapsed']}s")
                elif row["status"] == "infeasible-p1":
                    instance = generate_instance(scenario(name), 5, row["seed"])
                    if independently_certified_infeasible(instance):
                        certified += 1
                    else:
                        problems.append(f"{name}/{row['seed']}: infeasibility claim not certified")
                else:
                    problems.append(f"{name}/{row['seed']}: {row['status']}")
        detail = f"{solved} solved, {certified} proven infeasible; issues: {problems or 'none'}"
        report("feasibility-suite", not problems, detail)

    def test_solved_schedules_verify_cleanly(self, benchmark_rows):
        # Spot re-verify one solved run per scenario end to end.
        clean = True
        for name, rows in benchmark_rows.items():
            row = next(r for r in rows if r["status"] == "solved")
            instance = generate_instance(scenario(name), 5, row["seed"])
            outcome = solve(instance, SolverConfig(time_limit=10.0, seed=row["seed"]))
            clean &= check_schedule(instance, outcome.best_schedule) == []
        report("feasibility-verifier-crosscheck", clean)


class TestEfficiency:
    def test_scenario_a_or_time(self, benchmark_rows):
        rows = [r for r in benchmark_rows["A"] if r["status"] == "solved"]
        mean = sum(r["or_time_efficiency"] for r in rows) / len(rows)
        report("scenario-a-or-efficiency", len(rows) == 10 and mean >= 0.90,
               f"mean {mean:.3f} over {len(rows)} runs (threshold 0.90)")

    def test_scenario_b_bed_occupancy(self, benchmark_rows):
        rows = [r for r in benchmark_rows["B"] if r["status"] == "solved"]
        mean = sum(r["bed_occupancy_efficiency"] for r in rows) / len(rows)
        report("scenario-b-bed-efficiency", len(rows) == 10 and mean >= 0.85,
               f"mean {mean:.3f} over {len(rows)} runs (threshold 0.85)")

    def test_scenario_c_bed_occupancy(self, benchmark_rows):
        rows = [r for r in benchmark_rows["C"] if r["status"] == "solved"]
        mean = sum(r["bed_occupancy_efficiency"] for r in rows) / len(rows)
        report("scenario-c-bed-efficiency", bool(rows) and mean >= 0.78,
               f"mean {mean:.3f} over {len(rows)} solved runs (threshold 0.78)")


class TestScalability:
    def test_horizon_smoke(self, scalability_rows):
        problems = []
        for days, row in scalability_rows.items():
            if row["status"] != "solved":
                problems.append(f"{days}d: {row['status']}")
                continue
            p1_assigned, p1_total = row["assigned"]["p1"]
            if p1_assigned != p1_total:
                problems.append(f"{days}d: P1 {p1_assigned}/{p1_total}")
        fifteen = scalability_rows[15]
        or_eff = fifteen.get("or_time_efficiency", 0.0)
        if or_eff < 0.55:
            problems.append(f"15d OR efficiency {or_eff:.3f} < 0.55")
        report("scalability-smoke", not problems,
               f"15-day OR efficiency {or_eff:.3f}; issues: {problems or 'none'}")


class TestOracleEquivalence:
    def test_200_tiny_instances(self):
        started = time.monotonic()
        matched = infeasible = 0
        problems = []
        for seed in range(200):
            instance = random_tiny_instance(seed)
            config = SolverConfig(iteration_budget=30_000, seed=seed)
            try:
                oracle_objective, _ = brute_force_schedule(instance)
            except SolveError:
                infeasible += 1
                try:
                    solve(instance, config)
                    problems.append(f"seed {seed}: solved a provably infeasible instance")
                except SolveError:
                    pass
                continue
            try:
                outcome = solve(instance, config)
            except SolveError as error:
                problems.append(f"seed {seed}: solver failed ({error.code})")
                continue
            if outcome.objective == oracle_objective:
                matched += 1
            else:
                problems.append(f"seed {seed}: {outcome.objective} != {oracle_objective}")
        elapsed = time.monotonic() - started
        if elapsed > 600:
            problems.append(f"took {elapsed:.0f}s > 600s")
        report("oracle-equivalence", not problems,
               f"{matched} matched, {infeasible} infeasible on both routes, {elapsed:.0f}s")


class TestRescheduleProperties:
    def test_100_tiny_requests(self):
        built = matched = infeasible = 0
        problems = []
        seed = 0
        while built < 100 and seed < 400:
            request = random_tiny_request(seed)
            seed += 1
            if request is None:
                continue
            built += 1
            config = SolverConfig(iteration_budget=30_000, seed=seed)
            try:
                oracle_objective, _ = brute_force_reschedule(request, TINY_LIMITS)
            except RescheduleError:
                infeasible += 1
                try:
                    reschedule(request, config)
                    problems.append(f"seed {seed}: rescheduled a provably infeasible request")
                except RescheduleError:
                    pass
                continue
            try:
                outcome = reschedule(request, config)
            except RescheduleError as error:
                problems.append(f"seed {seed}: rescheduler failed ({error.code})")
                continue
            if outcome.objective != oracle_objective:
                problems.append(f"seed {seed}: {outcome.objective} != {oracle_objective}")
                continue
            if not request.postponed <= outcome.new_schedule.assigned_ids():
                problems.append(f"seed {seed}: postponed registration missing")
                continue
            regs = request.instance.registration_map()
            executed_offset = sum(
                1 for a in request.old_schedule.assignments
                if a.day <= request.disruption_day
                and a.registration_id not in request.postponed
                and regs[a.registration_id].priority in (1, 2)
            )
            if oracle_objective.level4 == executed_offset and outcome.objective.level4 != executed_offset:
                problems.append(f"seed {seed}: dropped P1/P2 although a P3-only drop set exists")
                continue
            matched += 1
        report("reschedule-oracle-equivalence", built == 100 and not problems,
               f"{matched} matched, {infeasible} infeasible on both routes, {built} built; "
               f"issues: {problems or 'none'}")

    def test_disruption_reference_family(self):
        instance = generate_instance(scenario("A"), 5, 0)
        outcome = solve(instance, SolverConfig(time_limit=TIME_LIMIT, seed=0))
        old = outcome.best_schedule
        regs = instance.registration_map()
        day2_spec1 = sorted(
            a.registration_id for a in old.assignments
            if a.day == 2 and regs[a.registration_id].specialty == 1
        )
        problems = []
        observed = []
        for postponed_count, max_dropped in ((1, 0), (2, 1), (4, 2), (6, 4)):
            request = RescheduleRequest(
                instance=instance,
                old_schedule=old,
                postponed=frozenset(day2_spec1[:postponed_count]),
                disruption_day=2,
                specialty_filter=1,
            )
            result = reschedule(request, SolverConfig(iteration_budget=400_000, seed=postponed_count))
            observed.append(len(result.dropped))
            if not request.postponed <= result.new_schedule.assigned_ids():
                problems.append(f"K={postponed_count}: postponed missing")
            if len(result.dropped) > max_dropped:
                problems.append(f"K={postponed_count}: dropped {len(result.dropped)} > {max_dropped}")
            if any(regs[reg_id].priority != 3 for reg_id in result.dropped):
                problems.append(f"K={postponed_count}: dropped a P1/P2 registration")
        report("reschedule-disruption-family", not problems,
               f"dropped {observed} for postponed (1, 2, 4, 6); issues: {problems or 'none'}")


class TestGeneratorStatistics:
    def test_priority_shares_counts_and_minutes(self):
        problems = []
        counts: collections.Counter = collections.Counter()
        for seed in range(50):
            instance = generate_instance(scenario("A"), 5, seed)
            counts.update(r.priority for r in instance.registrations)
        total = sum(counts.values())
        shares = [counts[p] / total for p in (1, 2, 3)]
        for share, expected in zip(shares, (0.20, 0.40, 0.40)):
            if abs(share - expected) > 0.05:
                problems.append(f"share {share:.3f} vs {expected}")

        reference_counts = {
            1: (16, 14, 14, 12, 14), 2: (32, 28, 28, 24, 28), 3: (48, 42, 42, 36, 42),
            5: (80, 70, 70, 60, 70), 7: (112, 98, 98, 84, 98),
            10: (160, 140, 140, 120, 140), 15: (240, 210, 210, 180, 210),
        }
        for days, expected in reference_counts.items():
            instance = generate_instance(scenario("A"), days, 1)
            by_specialty = collections.Counter(r.specialty for r in instance.registrations)
            got = tuple(by_specialty[s] for s in (1, 2, 3, 4, 5))
            if got != expected:
                problems.append(f"{days}-day counts {got} != {expected}")

        five_day = generate_instance(scenario("A"), 5, 2)
        minutes = sum(five_day.capacity_map()[(s.or_id, s.session)] for s in five_day.mss)
        if minutes != 30_000:
            problems.append(f"session minutes {minutes} != 30000")
        report("generator-statistics", not problems,
               f"shares {[round(s, 3) for s in shares]}, minutes {minutes}; issues: {problems or 'none'}")


class TestDeterminism:
    def test_instance_and_schedule_files_are_byte_identical(self, tmp_path):
        problems = []
        for name in ("A", "B", "C"):
            spec = scenario(name)
            blobs = []
            for run in range(2):
                path = tmp_path / f"{name}-{run}.json"
                write_instance(generate_instance(spec, 5, 4), path, metadata_for(spec, 5, 4))
                blobs.append(path.read_bytes())
            if blobs[0] != blobs[1]:
                problems.append(f"instance files differ for scenario {name}")

        instance = generate_instance(scenario("A"), 2, 4)
        blobs = []
        for run in range(2):
            outcome = solve(instance, SolverConfig(iteration_budget=120_000, seed=4))
            path = tmp_path / f"schedule-{run}.json"
            write_schedule(outcome.best_schedule, path)
            blobs.append(path.read_bytes())
        if blobs[0] != blobs[1]:
            problems.append("schedule files differ across repeated solves")
        report("determinism", not problems, f"issues: {problems or 'none'}")
