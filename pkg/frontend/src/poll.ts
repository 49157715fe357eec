// Run monitoring: poll the job once a second with a monotone incumbent
// cursor, surface each new incumbent, and stop on a terminal state.

import type { ApiClient } from "./api.js";
import type { IncumbentEntry, JobPoll } from "./types.js";

export interface MonitorHandlers {
  onIncumbent(entry: IncumbentEntry, poll: JobPoll): void;
  onTerminal(poll: JobPoll): void;
  onError?(error: unknown): void;
}

export interface Monitor {
  stop(): void;
}

export function monitorRun(
  api: ApiClient,
  jobId: string,
  handlers: MonitorHandlers,
  intervalMs = 1000,
): Monitor {
  let since = 0;
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | undefined;

  const tick = async () => {
    if (stopped) {
      return;
    }
    try {
      const poll = await api.pollJob(jobId, since);
      for (const entry of poll.incumbents) {
        since = Math.max(since, entry.index);
        handlers.onIncumbent(entry, poll);
      }
      if (poll.state === "done" || poll.state === "failed") {
        stopped = true;
        handlers.onTerminal(poll);
        return;
      }
    } catch (error) {
      handlers.onError?.(error);
    }
    if (!stopped) {
      timer = setTimeout(tick, intervalMs);
    }
  };

  void tick();
  return {
    stop() {
      stopped = true;
      if (timer !== undefined) {
        clearTimeout(timer);
      }
    },
  };
}
