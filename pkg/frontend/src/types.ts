// Payload shapes of the planning service API. The console renders these
// verbatim; every displayed number traces back to one of these fields.

export interface SpecialtyParams {
  specialty: number;
  registrations_per_5day: number;
  or_count: number;
  surgery_mean: number;
  surgery_std: number;
  los_mean: number;
  los_std: number;
  icu_fraction: number;
  icu_mean: number;
  icu_std: number;
  admit_advance: number;
}

export interface BedRow {
  ward: number;
  day: number;
  available: number;
}

export interface ScenarioDoc {
  id?: string;
  name: string;
  horizon: number;
  quota_percent: number;
  priority_weights: [number, number, number];
  specialty_params: SpecialtyParams[];
  beds: BedRow[];
  created_at?: string;
  format?: number;
}

export interface ScenarioSummary {
  id: string;
  name: string;
  horizon: number;
  created_at: string;
}

export interface SolveObjective {
  unassigned_p2: number;
  unassigned_p3: number;
}

export interface MetricsPayload {
  assigned_by_priority: [number, number][];
  or_time_efficiency: number;
  bed_occupancy_efficiency: number;
}

export interface IncumbentEntry {
  index: number;
  timestamp: string;
  elapsed: number;
  objective: SolveObjective;
  metrics?: MetricsPayload;
  schedule: unknown;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobPoll {
  id: string;
  kind: "solve" | "reschedule";
  state: JobState;
  error: { code: string; message: string } | null;
  incumbent_count: number;
  incumbents: IncumbentEntry[];
}

export interface OccupancyDay {
  day: number;
  occupied_prior: number;
  occupied_new: number;
  available: number;
  quota: number;
}

export interface OccupancySeries {
  ward: number;
  days: OccupancyDay[];
}

export interface OrSegment {
  registration_id: number;
  priority: number;
  minutes: number;
}

export interface OrColumn {
  or_id: number;
  specialty: number;
  capacity: number;
  segments: OrSegment[];
}

export interface OrBlock {
  day: number;
  session: number;
  ors: OrColumn[];
}

export interface JobResults {
  id: string;
  kind: string;
  result: {
    objective: Record<string, number>;
    metrics?: MetricsPayload;
    schedule: unknown;
    proved_optimal?: boolean;
    dropped?: number[];
  };
  occupancy: OccupancySeries[];
  or_schedule: OrBlock[];
}

export interface JobConfig {
  time_limit?: number;
  seed?: number;
  iteration_budget?: number;
}
