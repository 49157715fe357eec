"""Versioned JSON file formats for instances and schedules.

Instance documents carry ``format: 1`` plus the keys ``horizon``,
``registrations``, ``mss``, ``capacities`` and ``beds``; schedule documents
carry ``format: 1`` and ``assignments``.  Field names match the data-model
attributes one for one, identifiers are non-negative integers, and an
optional ``metadata`` object records provenance (e.g. generator scenario,
seed and version).  Writers emit keys in a fixed order so that repeated
runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping

from .model import (
    Assignment,
    BedAvailability,
    Instance,
    MssSlot,
    Registration,
    Schedule,
    SessionCapacity,
)

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Raised when a document does not match the expected schema."""


def _require(mapping: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise FormatError(f"missing key '{key}' in {where}")
    return mapping[key]


def _require_int(mapping: Mapping[str, Any], key: str, where: str) -> int:
    value = _require(mapping, key, where)
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"key '{key}' in {where} must be an integer, got {value!r}")
    return value


def _check_format(document: Mapping[str, Any], where: str) -> None:
    version = _require(document, "format", where)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported {where} format {version!r}, expected {FORMAT_VERSION}")


def registration_to_dict(reg: Registration) -> dict[str, int]:
    return {
        "id": reg.id,
        "priority": reg.priority,
        "surgery_duration": reg.surgery_duration,
        "los_after": reg.los_after,
        "specialty": reg.specialty,
        "icu_los": reg.icu_los,
        "admit_advance": reg.admit_advance,
    }


def instance_to_dict(instance: Instance, metadata: Mapping[str, Any] | None = None) -> dict[str, Any]:
    document: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "horizon": instance.horizon,
        "registrations": [registration_to_dict(r) for r in instance.registrations],
        "mss": [
            {"or_id": s.or_id, "session": s.session, "specialty": s.specialty, "day": s.day}
            for s in instance.mss
        ],
        "capacities": [
            {"or_id": c.or_id, "session": c.session, "duration": c.duration}
            for c in instance.capacities
        ],
        "beds": [
            {"ward": b.ward, "day": b.day, "available": b.available}
            for b in instance.beds
        ],
    }
    if metadata is not None:
        document["metadata"] = dict(metadata)
    return document


def instance_from_dict(document: Mapping[str, Any]) -> Instance:
    _check_format(document, "instance")
    registrations = tuple(
        Registration(
            id=_require_int(item, "id", "registration"),
            priority=_require_int(item, "priority", "registration"),
            surgery_duration=_require_int(item, "surgery_duration", "registration"),
            los_after=_require_int(item, "los_after", "registration"),
            specialty=_require_int(item, "specialty", "registration"),
            icu_los=_require_int(item, "icu_los", "registration"),
            admit_advance=_require_int(item, "admit_advance", "registration"),
        )
        for item in _require(document, "registrations", "instance")
    )
    mss = tuple(
        MssSlot(
            or_id=_require_int(item, "or_id", "mss slot"),
            session=_require_int(item, "session", "mss slot"),
            specialty=_require_int(item, "specialty", "mss slot"),
            day=_require_int(item, "day", "mss slot"),
        )
        for item in _require(document, "mss", "instance")
    )
    capacities = tuple(
        SessionCapacity(
            or_id=_require_int(item, "or_id", "capacity"),
            session=_require_int(item, "session", "capacity"),
            duration=_require_int(item, "duration", "capacity"),
        )
        for item in _require(document, "capacities", "instance")
    )
    beds = tuple(
        BedAvailability(
            ward=_require_int(item, "ward", "bed entry"),
            day=_require_int(item, "day", "bed entry"),
            available=_require_int(item, "available", "bed entry"),
        )
        for item in _require(document, "beds", "instance")
    )
    return Instance(
        horizon=_require_int(document, "horizon", "instance"),
        registrations=registrations,
        mss=mss,
        capacities=capacities,
        beds=beds,
    )


def instance_metadata(document: Mapping[str, Any]) -> dict[str, Any]:
    metadata = document.get("metadata", {})
    return dict(metadata) if isinstance(metadata, Mapping) else {}


def schedule_to_dict(schedule: Schedule, metadata: Mapping[str, Any] | None = None) -> dict[str, Any]:
    document: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "assignments": [
            {
                "registration_id": a.registration_id,
                "priority": a.priority,
                "or_id": a.or_id,
                "session": a.session,
                "day": a.day,
            }
            for a in schedule.assignments
        ],
    }
    if metadata is not None:
        document["metadata"] = dict(metadata)
    return document


def schedule_from_dict(document: Mapping[str, Any]) -> Schedule:
    _check_format(document, "schedule")
    assignments = tuple(
        Assignment(
            registration_id=_require_int(item, "registration_id", "assignment"),
            priority=_require_int(item, "priority", "assignment"),
            or_id=_require_int(item, "or_id", "assignment"),
            session=_require_int(item, "session", "assignment"),
            day=_require_int(item, "day", "assignment"),
        )
        for item in _require(document, "assignments", "schedule")
    )
    return Schedule(assignments=assignments)


def dump_json(document: Mapping[str, Any], path: str | Path) -> None:
    """Write atomically: full document or nothing, never a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")
    os.replace(tmp, path)


def load_json(path: str | Path) -> dict[str, Any]:
    with Path(path).open("r", encoding="utf-8") as handle:
        document = json.load(handle)
    if not isinstance(document, dict):
        raise FormatError(f"{path}: top-level JSON value must be an object")
    return document


def write_instance(instance: Instance, path: str | Path, metadata: Mapping[str, Any] | None = None) -> None:
    dump_json(instance_to_dict(instance, metadata), path)


def read_instance(path: str | Path) -> Instance:
    return instance_from_dict(load_json(path))


def write_schedule(schedule: Schedule, path: str | Path, metadata: Mapping[str, Any] | None = None) -> None:
    dump_json(schedule_to_dict(schedule, metadata), path)


def read_schedule(path: str | Path) -> Schedule:
    return schedule_from_dict(load_json(path))
