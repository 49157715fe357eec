// Offline copies of the service's built-in scenario presets so the editor
// and the tests can render them without a round trip.

import type { ScenarioDoc, SpecialtyParams } from "./types.js";

const SHARED_PARAMS: SpecialtyParams[] = [
  { specialty: 1, registrations_per_5day: 80, or_count: 3, surgery_mean: 124, surgery_std: 59.52, los_mean: 7.91, los_std: 2, icu_fraction: 0.1, icu_mean: 1, icu_std: 1, admit_advance: 1 },
  { specialty: 2, registrations_per_5day: 70, or_count: 2, surgery_mean: 99, surgery_std: 17.82, los_mean: 9.81, los_std: 2, icu_fraction: 0.1, icu_mean: 1, icu_std: 1, admit_advance: 1 },
  { specialty: 3, registrations_per_5day: 70, or_count: 2, surgery_mean: 134, surgery_std: 25.46, los_mean: 11.06, los_std: 3, icu_fraction: 0.1, icu_mean: 1, icu_std: 1, admit_advance: 1 },
  { specialty: 4, registrations_per_5day: 60, or_count: 1, surgery_mean: 95, surgery_std: 19.95, los_mean: 6.36, los_std: 1, icu_fraction: 0.1, icu_mean: 1, icu_std: 1, admit_advance: 0 },
  { specialty: 5, registrations_per_5day: 70, or_count: 2, surgery_mean: 105, surgery_std: 30.45, los_mean: 2.48, los_std: 1, icu_fraction: 0.1, icu_mean: 1, icu_std: 1, admit_advance: 0 },
];

function beds(rows: Record<number, number[]>) {
  return Object.entries(rows).flatMap(([ward, counts]) =>
    counts.map((available, i) => ({ ward: Number(ward), day: i + 1, available })),
  );
}

export const PRESETS: Record<string, ScenarioDoc> = {
  "scenario-a": {
    id: "scenario-a",
    name: "Scenario A",
    horizon: 5,
    quota_percent: 100,
    priority_weights: [0.2, 0.4, 0.4],
    specialty_params: SHARED_PARAMS,
    beds: beds({
      0: [40, 40, 40, 40, 40],
      1: [80, 80, 80, 80, 80],
      2: [58, 58, 58, 58, 58],
      3: [65, 65, 65, 65, 65],
      4: [57, 57, 57, 57, 57],
      5: [40, 40, 40, 40, 40],
    }),
  },
  "scenario-b": {
    id: "scenario-b",
    name: "Scenario B",
    horizon: 5,
    quota_percent: 100,
    priority_weights: [0.2, 0.4, 0.4],
    specialty_params: SHARED_PARAMS,
    beds: beds({
      0: [4, 4, 5, 5, 6],
      1: [20, 30, 40, 45, 50],
      2: [10, 15, 23, 30, 35],
      3: [10, 14, 21, 30, 35],
      4: [8, 10, 14, 16, 18],
      5: [10, 14, 20, 23, 25],
    }),
  },
  "scenario-c": {
    id: "scenario-c",
    name: "Scenario C",
    horizon: 5,
    quota_percent: 100,
    priority_weights: [0.2, 0.4, 0.4],
    specialty_params: SHARED_PARAMS,
    beds: beds({
      0: [4, 4, 5, 5, 6],
      1: [10, 15, 20, 25, 30],
      2: [7, 10, 11, 14, 18],
      3: [7, 10, 13, 16, 20],
      4: [4, 6, 8, 11, 13],
      5: [6, 9, 12, 15, 18],
    }),
  },
};
