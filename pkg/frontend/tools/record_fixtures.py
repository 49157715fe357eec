"""Records API fixtures for the console tests.

Runs a small seeded solve job against the real service in-process and dumps
the poll and results payloads; also writes a reference-run poll fixture
whose final incumbent carries the benchmark counts the priority cards are
tested against (62/62, 132/150, 72/138).

Usage: python tools/record_fixtures.py
"""

from __future__ import annotations

import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from orsched.fileio import instance_to_dict
from orsched.generate import generate_instance, scenario
from orsched.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def wait_done(client: TestClient, job_id: str) -> None:
    for _ in range(600):
        state = client.get(f"/jobs/{job_id}").json()["state"]
        if state in ("done", "failed"):
            assert state == "done", state
            return
        time.sleep(0.05)
    raise RuntimeError("job did not finish")


def record_small_run() -> None:
    instance = generate_instance(scenario("A"), 1, 0)
    with tempfile.TemporaryDirectory() as store:
        with TestClient(create_app(store)) as client:
            body = {
                "kind": "solve",
                "instance": instance_to_dict(instance),
                "config": {"iteration_budget": 150_000, "seed": 0},
            }
            job_id = client.post("/jobs", json=body).json()["id"]
            wait_done(client, job_id)
            poll = client.get(f"/jobs/{job_id}", params={"since": 0}).json()
            results = client.get(f"/jobs/{job_id}/results").json()
    poll["id"] = results["id"] = "job-small-fixture"
    (FIXTURES / "poll-small.json").write_text(json.dumps(poll, indent=2) + "\n")
    (FIXTURES / "results-small.json").write_text(json.dumps(results, indent=2) + "\n")


def synthesize_reference_run() -> None:
    """Poll payload in the recorded schema whose incumbents march to the
    published scenario-A reference counts."""
    steps = [
        ((62, 62), (118, 150), (54, 138), 0.921, 0.487),
        ((62, 62), (126, 150), (64, 138), 0.947, 0.503),
        ((62, 62), (132, 150), (72, 138), 0.966, 0.520),
    ]
    incumbents = []
    for i, (p1, p2, p3, or_eff, bed_eff) in enumerate(steps, start=1):
        incumbents.append({
            "index": i,
            "timestamp": f"2021-03-01T09:00:{i:02d}+00:00",
            "elapsed": 3.5 * i,
            "objective": {
                "unassigned_p2": p2[1] - p2[0],
                "unassigned_p3": p3[1] - p3[0],
            },
            "metrics": {
                "assigned_by_priority": [list(p1), list(p2), list(p3)],
                "or_time_efficiency": or_eff,
                "bed_occupancy_efficiency": bed_eff,
            },
            "schedule": {"format": 1, "assignments": []},
        })
    poll = {
        "id": "job-reference-run",
        "kind": "solve",
        "state": "done",
        "error": None,
        "incumbent_count": len(incumbents),
        "incumbents": incumbents,
    }
    (FIXTURES / "poll-reference-run.json").write_text(json.dumps(poll, indent=2) + "\n")


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    record_small_run()
    synthesize_reference_run()
    print(f"fixtures written to {FIXTURES}")
