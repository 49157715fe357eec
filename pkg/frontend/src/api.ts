import type {
  JobConfig,
  JobPoll,
  JobResults,
  ScenarioDoc,
  ScenarioSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail?: unknown,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl = "",
    private token?: string,
    private fetchFn: typeof fetch = globalThis.fetch?.bind(globalThis),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) {
      headers["authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (payload as { detail?: { code?: string; message?: string } }).detail;
      throw new ApiError(
        response.status,
        detail?.code ?? "http-error",
        detail?.message ?? `${method} ${path} failed with ${response.status}`,
        detail,
      );
    }
    return payload as T;
  }

  listScenarios(): Promise<{ scenarios: ScenarioSummary[] }> {
    return this.request("GET", "/scenarios");
  }

  getScenario(id: string): Promise<ScenarioDoc> {
    return this.request("GET", `/scenarios/${id}`);
  }

  saveScenario(doc: ScenarioDoc): Promise<{ id: string }> {
    return this.request("POST", "/scenarios", doc);
  }

  submitSolve(scenarioId: string, config: JobConfig): Promise<{ id: string }> {
    return this.request("POST", "/jobs", {
      kind: "solve",
      scenario_id: scenarioId,
      config,
    });
  }

  pollJob(id: string, since = 0): Promise<JobPoll> {
    return this.request("GET", `/jobs/${id}?since=${since}`);
  }

  getResults(id: string): Promise<JobResults> {
    return this.request("GET", `/jobs/${id}/results`);
  }

  cancelJob(id: string): Promise<{ id: string; state: string }> {
    return this.request("DELETE", `/jobs/${id}`);
  }
}
