"""HTTP planning service: scenario store plus long-running solve jobs.

Scenarios (generation parameters, bed tables, quota) live in a single-node
file-backed store with atomic writes.  Jobs run on a worker pool; each
strictly improving incumbent is appended to the job record so clients can
poll ``GET /jobs/{id}?since=k`` with a monotone index and render progress
live.  An optional static bearer token guards every endpoint.
"""

from __future__ import annotations

import datetime
import re
import secrets
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Literal

from fastapi import Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel, Field

from . import fileio, generate
from .model import BedAvailability, Instance, Schedule, occupancy, validate_instance
from .reschedule import RescheduleError, RescheduleRequest, reschedule, validate_request
from .solver import SolveError, SolverConfig, solve
from .verify import compute_metrics


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _error(status: int, code: str, message: str, **extra: Any) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message, **extra})


class SpecialtyParamsIn(BaseModel):
    specialty: int = Field(ge=1)
    registrations_per_5day: int = Field(ge=0)
    or_count: int = Field(ge=0)
    surgery_mean: float = Field(gt=0)
    surgery_std: float = Field(ge=0)
    los_mean: float = Field(gt=0)
    los_std: float = Field(ge=0)
    icu_fraction: float = Field(ge=0, le=1)
    icu_mean: float = Field(gt=0)
    icu_std: float = Field(ge=0)
    admit_advance: int = Field(ge=0)


class BedIn(BaseModel):
    ward: int = Field(ge=0)
    day: int = Field(ge=1)
    available: int = Field(ge=0)


class ScenarioIn(BaseModel):
    name: str
    horizon: int = Field(ge=1)
    quota_percent: int = Field(default=100, ge=0, le=100)
    specialty_params: list[SpecialtyParamsIn]
    beds: list[BedIn]
    priority_weights: tuple[float, float, float] = (0.20, 0.40, 0.40)


class ConfigIn(BaseModel):
    time_limit: float = Field(default=60.0, gt=0)
    seed: int | None = None
    iteration_budget: int | None = Field(default=None, gt=0)


class DisruptionIn(BaseModel):
    day: int = Field(default=2, ge=1)
    postponed: list[int]
    specialty: int | None = None
    window: tuple[int, int] | None = None


class JobIn(BaseModel):
    kind: Literal["solve", "reschedule"]
    scenario_id: str | None = None
    instance: dict[str, Any] | None = None
    old_schedule: dict[str, Any] | None = None
    disruption: DisruptionIn | None = None
    config: ConfigIn = ConfigIn()


_ID_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9_-]*")


def _safe_id(identifier: str) -> bool:
    return bool(_ID_PATTERN.fullmatch(identifier))


class Store:
    """Directory-backed document store with atomic writes.

    Document ids are restricted to a filename-safe alphabet so they can
    never escape the store directory.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.scenarios = self.root / "scenarios"
        self.jobs = self.root / "jobs"
        self.scenarios.mkdir(parents=True, exist_ok=True)
        self.jobs.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def save_scenario(self, doc: dict[str, Any]) -> None:
        with self._lock:
            fileio.dump_json(doc, self.scenarios / f"{doc['id']}.json")

    def load_scenario(self, scenario_id: str) -> dict[str, Any] | None:
        if not _safe_id(scenario_id):
            return None
        path = self.scenarios / f"{scenario_id}.json"
        return fileio.load_json(path) if path.exists() else None

    def list_scenarios(self) -> list[dict[str, Any]]:
        docs = []
        for path in sorted(self.scenarios.glob("*.json")):
            doc = fileio.load_json(path)
            docs.append({
                "id": doc["id"],
                "name": doc["name"],
                "horizon": doc["horizon"],
                "created_at": doc["created_at"],
            })
        return docs

    def save_job(self, doc: dict[str, Any]) -> None:
        with self._lock:
            fileio.dump_json(doc, self.jobs / f"{doc['id']}.json")

    def load_job(self, job_id: str) -> dict[str, Any] | None:
        if not _safe_id(job_id):
            return None
        path = self.jobs / f"{job_id}.json"
        return fileio.load_json(path) if path.exists() else None


class JobRecord:
    """In-memory job state; every mutation happens under the lock and is
    persisted as a full snapshot so observers see one consistent order."""

    def __init__(self, doc: dict[str, Any], store: Store):
        self.doc = doc
        self.store = store
        self.lock = threading.Lock()
        self.cancel = threading.Event()

    def snapshot(self) -> dict[str, Any]:
        with self.lock:
            return {**self.doc, "incumbents": list(self.doc["incumbents"])}

    def update(self, **fields: Any) -> None:
        with self.lock:
            self.doc.update(fields)
            self.store.save_job(self.doc)

    def append_incumbent(self, entry: dict[str, Any]) -> None:
        with self.lock:
            entry["index"] = len(self.doc["incumbents"]) + 1
            self.doc["incumbents"].append(entry)
            self.store.save_job(self.doc)


def _scenario_doc(payload: ScenarioIn, scenario_id: str) -> dict[str, Any]:
    return {
        "format": fileio.FORMAT_VERSION,
        "id": scenario_id,
        "name": payload.name,
        "created_at": _now(),
        "horizon": payload.horizon,
        "quota_percent": payload.quota_percent,
        "priority_weights": list(payload.priority_weights),
        "specialty_params": [p.model_dump() for p in payload.specialty_params],
        "beds": [b.model_dump() for b in payload.beds],
    }


def _preset_docs() -> list[dict[str, Any]]:
    docs = []
    for name, spec in generate.SCENARIOS.items():
        docs.append({
            "format": fileio.FORMAT_VERSION,
            "id": f"scenario-{name.lower()}",
            "name": f"Scenario {name}",
            "created_at": _now(),
            "horizon": 5,
            "quota_percent": 100,
            "priority_weights": list(spec.priority_weights),
            "specialty_params": [
                {
                    "specialty": p.specialty,
                    "registrations_per_5day": p.registrations_per_5day,
                    "or_count": p.or_count,
                    "surgery_mean": p.surgery_mean,
                    "surgery_std": p.surgery_std,
                    "los_mean": p.los_mean,
                    "los_std": p.los_std,
                    "icu_fraction": p.icu_fraction,
                    "icu_mean": p.icu_mean,
                    "icu_std": p.icu_std,
                    "admit_advance": p.admit_advance,
                }
                for p in spec.specialty_params
            ],
            "beds": [{"ward": b.ward, "day": b.day, "available": b.available} for b in spec.bed_table],
        })
    return docs


def _spec_from_doc(doc: dict[str, Any]) -> generate.ScenarioSpec:
    return generate.ScenarioSpec(
        name=doc["name"],
        bed_table=tuple(BedAvailability(**b) for b in doc["beds"]),
        specialty_params=tuple(generate.SpecialtyGenParams(**p) for p in doc["specialty_params"]),
        priority_weights=tuple(doc["priority_weights"]),
    )


def _apply_quota(instance: Instance, quota_percent: int) -> Instance:
    if quota_percent >= 100:
        return instance
    beds = tuple(
        BedAvailability(b.ward, b.day, b.available * quota_percent // 100)
        for b in instance.beds
    )
    return Instance(
        horizon=instance.horizon,
        registrations=instance.registrations,
        mss=instance.mss,
        capacities=instance.capacities,
        beds=beds,
    )


def _occupancy_series(
    instance: Instance,
    declared: dict[tuple[int, int], int],
    prior: dict[tuple[int, int], int],
    new: dict[tuple[int, int], int],
) -> list[dict[str, Any]]:
    effective = instance.bed_map()
    wards = sorted({ward for ward, _ in effective})
    series = []
    for ward in wards:
        days = []
        for day in range(1, instance.horizon + 1):
            days.append({
                "day": day,
                "occupied_prior": prior.get((ward, day), 0),
                "occupied_new": new.get((ward, day), 0),
                "available": declared.get((ward, day), effective.get((ward, day), 0)),
                "quota": effective.get((ward, day), 0),
            })
        series.append({"ward": ward, "days": days})
    return series


def _metrics_dict(instance: Instance, schedule: Schedule) -> dict[str, Any]:
    metrics = compute_metrics(instance, schedule)
    return {
        "assigned_by_priority": [list(pair) for pair in metrics.assigned_by_priority],
        "or_time_efficiency": metrics.or_time_efficiency,
        "bed_occupancy_efficiency": metrics.bed_occupancy_efficiency,
    }


def _or_schedule_series(instance: Instance, schedule: Schedule) -> list[dict[str, Any]]:
    """Per (day, session) OR columns with one segment per surgery, sized in
    minutes, so the console can draw session bars without touching the
    instance itself."""
    regs = instance.registration_map()
    capacities = instance.capacity_map()
    segments: dict[tuple[int, int, int], list[dict[str, int]]] = {}
    for a in sorted(schedule.assignments, key=lambda a: (a.day, a.session, a.or_id, a.registration_id)):
        reg = regs.get(a.registration_id)
        if reg is None:
            continue
        segments.setdefault((a.day, a.session, a.or_id), []).append({
            "registration_id": a.registration_id,
            "priority": a.priority,
            "minutes": reg.surgery_duration,
        })
    series: dict[tuple[int, int], dict[str, Any]] = {}
    for slot in sorted(instance.mss, key=lambda s: (s.day, s.session, s.or_id)):
        entry = series.setdefault(
            (slot.day, slot.session),
            {"day": slot.day, "session": slot.session, "ors": []},
        )
        entry["ors"].append({
            "or_id": slot.or_id,
            "specialty": slot.specialty,
            "capacity": capacities[(slot.or_id, slot.session)],
            "segments": segments.get((slot.day, slot.session, slot.or_id), []),
        })
    return [series[key] for key in sorted(series)]


def create_app(
    store_dir: str | Path,
    token: str | None = None,
    workers: int = 2,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    store = Store(store_dir)
    for doc in _preset_docs():
        if store.load_scenario(doc["id"]) is None:
            store.save_scenario(doc)

    def check_token(authorization: str | None = Header(default=None)) -> None:
        if token is not None and authorization != f"Bearer {token}":
            raise _error(401, "unauthorized", "missing or invalid bearer token")

    app = FastAPI(title="orsched planning service", dependencies=[Depends(check_token)])
    jobs: dict[str, JobRecord] = {}
    jobs_lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=workers)

    def get_job(job_id: str) -> JobRecord:
        with jobs_lock:
            record = jobs.get(job_id)
        if record is None:
            doc = store.load_job(job_id)
            if doc is None:
                raise _error(404, "unknown-job", f"no job {job_id}")
            if doc["state"] in ("queued", "running"):
                doc["state"] = "failed"
                doc["error"] = {"code": "interrupted", "message": "service restarted during the run"}
            record = JobRecord(doc, store)
            with jobs_lock:
                jobs[job_id] = record
        return record

    def resolve_solve_inputs(payload: JobIn) -> tuple[Instance, dict[str, Any], dict[str, Any]]:
        """Returns (effective instance, declared bed map, provenance)."""
        if payload.scenario_id is not None:
            doc = store.load_scenario(payload.scenario_id)
            if doc is None:
                raise _error(404, "unknown-scenario", f"no scenario {payload.scenario_id}")
            seed = payload.config.seed if payload.config.seed is not None else secrets.randbelow(2**31)
            spec = _spec_from_doc(doc)
            instance = generate.generate_instance(spec, doc["horizon"], seed)
            declared = instance.bed_map()
            instance = _apply_quota(instance, doc["quota_percent"])
            report = validate_instance(instance)
            if not report.ok:
                raise _error(
                    400, "invalid-scenario",
                    "the scenario generates an invalid instance (beds must cover "
                    "every specialty ward and the ICU for the whole horizon)",
                    issues=[issue.as_dict() for issue in report.issues],
                )
            provenance = {
                "scenario_id": payload.scenario_id,
                "seed": seed,
                "quota_percent": doc["quota_percent"],
            }
            return instance, declared, provenance
        if payload.instance is None:
            raise _error(400, "missing-instance", "provide a scenario_id or an inline instance")
        try:
            instance = fileio.instance_from_dict(payload.instance)
        except fileio.FormatError as error:
            raise _error(400, "bad-instance", str(error))
        report = validate_instance(instance)
        if not report.ok:
            raise _error(
                400, "invalid-instance", "instance fails validation",
                issues=[issue.as_dict() for issue in report.issues],
            )
        seed = payload.config.seed if payload.config.seed is not None else 0
        return instance, instance.bed_map(), {"seed": seed}

    def run_solve(record: JobRecord, instance: Instance, config: SolverConfig) -> None:
        record.update(state="running", started_at=_now())

        def sink(incumbent) -> None:
            record.append_incumbent({
                "timestamp": _now(),
                "elapsed": incumbent.elapsed,
                "objective": {
                    "unassigned_p2": incumbent.objective.unassigned_p2,
                    "unassigned_p3": incumbent.objective.unassigned_p3,
                },
                "metrics": _metrics_dict(instance, incumbent.schedule),
                "schedule": fileio.schedule_to_dict(incumbent.schedule),
            })

        try:
            outcome = solve(instance, config, sink, should_stop=record.cancel.is_set)
        except SolveError as error:
            code = "cancelled" if record.cancel.is_set() else error.code
            record.update(state="failed", error={"code": code, "message": str(error), "proof": error.proof})
            return
        except Exception as error:  # keep the job observable, never wedged
            record.update(state="failed", error={"code": "internal-error", "message": str(error)})
            return
        if record.cancel.is_set():
            record.update(state="failed", error={"code": "cancelled", "message": "cancelled by client"})
            return
        record.update(
            state="done",
            finished_at=_now(),
            result={
                "objective": {
                    "unassigned_p2": outcome.objective.unassigned_p2,
                    "unassigned_p3": outcome.objective.unassigned_p3,
                },
                "proved_optimal": outcome.proved_optimal,
                "elapsed": outcome.elapsed,
                "metrics": _metrics_dict(instance, outcome.best_schedule),
                "schedule": fileio.schedule_to_dict(outcome.best_schedule),
            },
        )

    def run_reschedule(record: JobRecord, request: RescheduleRequest, config: SolverConfig) -> None:
        record.update(state="running", started_at=_now())

        def sink(incumbent) -> None:
            record.append_incumbent({
                "timestamp": _now(),
                "elapsed": incumbent.elapsed,
                "objective": {
                    "level4": incumbent.objective.level4,
                    "level3": incumbent.objective.level3,
                    "level2": incumbent.objective.level2,
                    "level1": incumbent.objective.level1,
                },
                "schedule": fileio.schedule_to_dict(incumbent.new_schedule),
            })

        try:
            outcome = reschedule(request, config, sink, should_stop=record.cancel.is_set)
        except (RescheduleError, ValueError) as error:
            code = "cancelled" if record.cancel.is_set() else getattr(error, "code", "bad-request")
            record.update(state="failed", error={"code": code, "message": str(error)})
            return
        except Exception as error:  # keep the job observable, never wedged
            record.update(state="failed", error={"code": "internal-error", "message": str(error)})
            return
        if record.cancel.is_set():
            record.update(state="failed", error={"code": "cancelled", "message": "cancelled by client"})
            return
        record.update(
            state="done",
            finished_at=_now(),
            result={
                "objective": {
                    "level4": outcome.objective.level4,
                    "level3": outcome.objective.level3,
                    "level2": outcome.objective.level2,
                    "level1": outcome.objective.level1,
                },
                "dropped": sorted(outcome.dropped),
                "schedule": fileio.schedule_to_dict(outcome.new_schedule),
            },
        )

    @app.post("/scenarios", status_code=201)
    def save_scenario(payload: ScenarioIn) -> dict[str, Any]:
        scenario_id = f"scn-{secrets.token_hex(6)}"
        doc = _scenario_doc(payload, scenario_id)
        store.save_scenario(doc)
        return {"id": scenario_id}

    @app.get("/scenarios")
    def list_scenarios() -> dict[str, Any]:
        return {"scenarios": store.list_scenarios()}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str) -> dict[str, Any]:
        doc = store.load_scenario(scenario_id)
        if doc is None:
            raise _error(404, "unknown-scenario", f"no scenario {scenario_id}")
        return doc

    @app.post("/jobs", status_code=201)
    def submit_job(payload: JobIn) -> dict[str, Any]:
        job_id = f"job-{secrets.token_hex(6)}"
        config = SolverConfig(
            time_limit=payload.config.time_limit,
            seed=payload.config.seed if payload.config.seed is not None else 0,
            iteration_budget=payload.config.iteration_budget,
        )
        if payload.kind == "solve":
            instance, declared, provenance = resolve_solve_inputs(payload)
            config = SolverConfig(
                time_limit=config.time_limit,
                seed=provenance.get("seed", config.seed),
                iteration_budget=config.iteration_budget,
            )
            doc = {
                "format": fileio.FORMAT_VERSION,
                "id": job_id,
                "kind": "solve",
                "state": "queued",
                "created_at": _now(),
                "config": {
                    "time_limit": config.time_limit,
                    "seed": config.seed,
                    "iteration_budget": config.iteration_budget,
                },
                "provenance": provenance,
                "instance": fileio.instance_to_dict(instance),
                "declared_beds": [
                    {"ward": ward, "day": day, "available": available}
                    for (ward, day), available in sorted(declared.items())
                ],
                "incumbents": [],
            }
            record = JobRecord(doc, store)
            with jobs_lock:
                jobs[job_id] = record
            store.save_job(doc)
            pool.submit(run_solve, record, instance, config)
            return {"id": job_id}

        if payload.instance is None or payload.old_schedule is None or payload.disruption is None:
            raise _error(400, "missing-reschedule-inputs",
                         "reschedule jobs need instance, old_schedule and disruption")
        try:
            instance = fileio.instance_from_dict(payload.instance)
            old_schedule = fileio.schedule_from_dict(payload.old_schedule)
        except fileio.FormatError as error:
            raise _error(400, "bad-instance", str(error))
        report = validate_instance(instance)
        if not report.ok:
            raise _error(400, "invalid-instance", "instance fails validation",
                         issues=[issue.as_dict() for issue in report.issues])
        request = RescheduleRequest(
            instance=instance,
            old_schedule=old_schedule,
            postponed=frozenset(payload.disruption.postponed),
            disruption_day=payload.disruption.day,
            reschedule_days=payload.disruption.window,
            specialty_filter=payload.disruption.specialty,
        )
        try:
            validate_request(request)
        except ValueError as error:
            raise _error(400, "invalid-reschedule-request", str(error))
        doc = {
            "format": fileio.FORMAT_VERSION,
            "id": job_id,
            "kind": "reschedule",
            "state": "queued",
            "created_at": _now(),
            "config": {
                "time_limit": config.time_limit,
                "seed": config.seed,
                "iteration_budget": config.iteration_budget,
            },
            "instance": fileio.instance_to_dict(instance),
            "old_schedule": fileio.schedule_to_dict(old_schedule),
            "disruption": payload.disruption.model_dump(),
            "declared_beds": [
                {"ward": ward, "day": day, "available": available}
                for (ward, day), available in sorted(instance.bed_map().items())
            ],
            "incumbents": [],
        }
        record = JobRecord(doc, store)
        with jobs_lock:
            jobs[job_id] = record
        store.save_job(doc)
        pool.submit(run_reschedule, record, request, config)
        return {"id": job_id}

    @app.get("/jobs/{job_id}")
    def poll_job(job_id: str, since: int = 0) -> dict[str, Any]:
        record = get_job(job_id)
        doc = record.snapshot()
        return {
            "id": doc["id"],
            "kind": doc["kind"],
            "state": doc["state"],
            "error": doc.get("error"),
            "incumbent_count": len(doc["incumbents"]),
            "incumbents": [entry for entry in doc["incumbents"] if entry["index"] > since],
        }

    @app.get("/jobs/{job_id}/results")
    def job_results(job_id: str) -> dict[str, Any]:
        record = get_job(job_id)
        doc = record.snapshot()
        if doc["state"] != "done":
            raise _error(409, "job-not-done", f"job is {doc['state']}")
        instance = fileio.instance_from_dict(doc["instance"])
        schedule = fileio.schedule_from_dict(doc["result"]["schedule"])
        declared = {(b["ward"], b["day"]): b["available"] for b in doc["declared_beds"]}
        if doc["kind"] == "solve":
            prior: dict[tuple[int, int], int] = {}
            new = occupancy(instance, schedule)
        else:
            old_schedule = fileio.schedule_from_dict(doc["old_schedule"])
            disruption = doc["disruption"]
            postponed = set(disruption["postponed"])
            window_schedule = Schedule(assignments=tuple(
                a for a in schedule.assignments if a.day > disruption["day"]
            ))
            executed = Schedule(assignments=tuple(
                a for a in old_schedule.assignments
                if a.day <= disruption["day"] and a.registration_id not in postponed
            ))
            prior = occupancy(instance, executed)
            new = occupancy(instance, window_schedule)
        return {
            "id": doc["id"],
            "kind": doc["kind"],
            "result": doc["result"],
            "occupancy": _occupancy_series(instance, declared, prior, new),
            "or_schedule": _or_schedule_series(instance, schedule),
        }

    @app.delete("/jobs/{job_id}")
    def cancel_job(job_id: str) -> dict[str, Any]:
        record = get_job(job_id)
        record.cancel.set()
        doc = record.snapshot()
        return {"id": job_id, "state": doc["state"], "cancel_requested": True}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
