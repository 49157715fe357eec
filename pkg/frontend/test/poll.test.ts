import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api.js";
import { monitorRun } from "../src/poll.js";
import type { IncumbentEntry, JobPoll } from "../src/types.js";

function entry(index: number): IncumbentEntry {
  return {
    index,
    timestamp: "2021-03-01T09:00:00+00:00",
    elapsed: index,
    objective: { unassigned_p2: 10 - index, unassigned_p3: 20 - index },
    metrics: {
      assigned_by_priority: [
        [5, 5],
        [index, 10],
        [index, 20],
      ],
      or_time_efficiency: 0.5,
      bed_occupancy_efficiency: 0.5,
    },
    schedule: {},
  };
}

function pollPayload(state: JobPoll["state"], incumbents: IncumbentEntry[]): JobPoll {
  return {
    id: "job-1",
    kind: "solve",
    state,
    error: null,
    incumbent_count: incumbents.length,
    incumbents,
  };
}

describe("monitorRun", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("polls once a second with a monotone cursor and stops when done", async () => {
    const calls: number[] = [];
    const script: JobPoll[] = [
      pollPayload("running", [entry(1)]),
      pollPayload("running", [entry(2), entry(3)]),
      pollPayload("done", []),
    ];
    const api = {
      pollJob: vi.fn(async (_id: string, since: number) => {
        calls.push(since);
        return script[Math.min(calls.length - 1, script.length - 1)]!;
      }),
    } as unknown as ApiClient;

    const seen: number[] = [];
    let terminal: JobPoll | null = null;
    monitorRun(api, "job-1", {
      onIncumbent: (e) => seen.push(e.index),
      onTerminal: (poll) => {
        terminal = poll;
      },
    });

    await vi.advanceTimersByTimeAsync(0);
    expect(seen).toEqual([1]);
    await vi.advanceTimersByTimeAsync(999);
    expect(calls.length).toBe(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(seen).toEqual([1, 2, 3]);
    await vi.advanceTimersByTimeAsync(1000);
    expect(terminal!.state).toBe("done");
    expect(calls).toEqual([0, 1, 3]);

    await vi.advanceTimersByTimeAsync(5000);
    expect(calls.length).toBe(3);
  });

  it("stop() halts future polls", async () => {
    const api = {
      pollJob: vi.fn(async () => pollPayload("running", [])),
    } as unknown as ApiClient;
    const monitor = monitorRun(api, "job-1", {
      onIncumbent: () => {},
      onTerminal: () => {},
    });
    await vi.advanceTimersByTimeAsync(0);
    monitor.stop();
    await vi.advanceTimersByTimeAsync(10_000);
    expect((api.pollJob as ReturnType<typeof vi.fn>).mock.calls.length).toBe(1);
  });

  it("keeps polling through transient errors", async () => {
    let attempts = 0;
    const api = {
      pollJob: vi.fn(async () => {
        attempts += 1;
        if (attempts === 1) {
          throw new Error("network blip");
        }
        return pollPayload("done", [entry(1)]);
      }),
    } as unknown as ApiClient;
    const errors: unknown[] = [];
    let done = false;
    monitorRun(api, "job-1", {
      onIncumbent: () => {},
      onTerminal: () => {
        done = true;
      },
      onError: (e) => errors.push(e),
    });
    await vi.advanceTimersByTimeAsync(0);
    expect(errors.length).toBe(1);
    await vi.advanceTimersByTimeAsync(1000);
    expect(done).toBe(true);
  });
});

describe("api client error mapping", () => {
  it("raises ApiError with the service's machine-readable code", async () => {
    const { ApiClient: RealClient, ApiError } = await import("../src/api.js");
    const fetchStub = vi.fn(async () =>
      new Response(JSON.stringify({ detail: { code: "unknown-job", message: "no job x" } }), {
        status: 404,
        headers: { "content-type": "application/json" },
      }),
    );
    const client = new RealClient("", "secret", fetchStub as unknown as typeof fetch);
    await expect(client.pollJob("x")).rejects.toMatchObject({ code: "unknown-job", status: 404 });
    const [, init] = fetchStub.mock.calls[0]! as unknown as [string, RequestInit];
    expect((init.headers as Record<string, string>)["authorization"]).toBe("Bearer secret");
  });
});
