// Scenario editor model: the on-screen form uses mean/CV pairs like the
// input screen it reproduces, while the service stores mean/std. Numbers
// are canonicalized to six decimals at the edges so a save/reload cycle
// reproduces the form state exactly.

import type { BedRow, ScenarioDoc, SpecialtyParams } from "./types.js";

export interface SpecialtyFormRow {
  specialty: number;
  registrations: number;
  orCount: number;
  surgeryMean: number;
  surgeryCv: number;
  losMean: number;
  losCv: number;
  icuRatio: number;
  icuLosMean: number;
  icuLosCv: number;
  admitAdvance: number;
}

export interface FormState {
  name: string;
  horizon: number;
  quotaPercent: number;
  rows: SpecialtyFormRow[];
  wards: number[];
  beds: number[][]; // beds[wardIndex][dayIndex], aligned with `wards`
}

export type FormErrors = Record<string, string>;

export function round6(value: number): number {
  return Math.round(value * 1e6) / 1e6;
}

function cv(mean: number, std: number): number {
  return mean > 0 ? round6(std / mean) : 0;
}

export function validateForm(form: FormState): FormErrors {
  const errors: FormErrors = {};
  const bad = (key: string, message: string) => {
    errors[key] = message;
  };
  if (!form.name.trim()) {
    bad("name", "name is required");
  }
  if (!Number.isInteger(form.horizon) || form.horizon < 1) {
    bad("horizon", "horizon must be a whole number of days, at least 1");
  }
  if (!Number.isFinite(form.quotaPercent) || form.quotaPercent < 0 || form.quotaPercent > 100) {
    bad("quotaPercent", "quota must be between 0 and 100 percent");
  }
  form.rows.forEach((row, i) => {
    const at = (field: string) => `rows.${i}.${field}`;
    const finite = (field: keyof SpecialtyFormRow): boolean => {
      if (!Number.isFinite(row[field])) {
        bad(at(String(field)), "must be a number");
        return false;
      }
      return true;
    };
    if (finite("registrations") && row.registrations < 0) bad(at("registrations"), "must not be negative");
    if (finite("orCount") && row.orCount < 0) bad(at("orCount"), "must not be negative");
    if (finite("surgeryMean") && row.surgeryMean <= 0) bad(at("surgeryMean"), "must be positive");
    if (finite("surgeryCv") && row.surgeryCv < 0) bad(at("surgeryCv"), "must not be negative");
    if (finite("losMean") && row.losMean <= 0) bad(at("losMean"), "must be positive");
    if (finite("losCv") && row.losCv < 0) bad(at("losCv"), "must not be negative");
    if (finite("icuRatio") && (row.icuRatio < 0 || row.icuRatio > 1)) bad(at("icuRatio"), "must be between 0 and 1");
    if (finite("icuLosMean") && row.icuLosMean < 0) bad(at("icuLosMean"), "must not be negative");
    if (finite("icuLosCv") && row.icuLosCv < 0) bad(at("icuLosCv"), "must not be negative");
    if (Number.isFinite(row.icuLosMean) && Number.isFinite(row.losMean) && row.icuLosMean > row.losMean) {
      bad(at("icuLosMean"), "ICU stay cannot exceed the total stay");
    }
    if (finite("admitAdvance") && row.admitAdvance < 0) bad(at("admitAdvance"), "must not be negative");
  });
  form.beds.forEach((row, w) => {
    row.forEach((value, d) => {
      if (!Number.isInteger(value) || value < 0) {
        bad(`beds.${w}.${d}`, "beds must be whole and not negative");
      }
    });
  });
  return errors;
}

export function formToScenarioDoc(form: FormState): ScenarioDoc {
  const specialty_params: SpecialtyParams[] = form.rows.map((row) => ({
    specialty: row.specialty,
    registrations_per_5day: row.registrations,
    or_count: row.orCount,
    surgery_mean: row.surgeryMean,
    surgery_std: round6(row.surgeryMean * row.surgeryCv),
    los_mean: row.losMean,
    los_std: round6(row.losMean * row.losCv),
    icu_fraction: row.icuRatio,
    icu_mean: row.icuLosMean,
    icu_std: round6(row.icuLosMean * row.icuLosCv),
    admit_advance: row.admitAdvance,
  }));
  const beds: BedRow[] = [];
  form.wards.forEach((ward, w) => {
    form.beds[w]!.forEach((available, d) => {
      beds.push({ ward, day: d + 1, available });
    });
  });
  return {
    name: form.name,
    horizon: form.horizon,
    quota_percent: form.quotaPercent,
    priority_weights: [0.2, 0.4, 0.4],
    specialty_params,
    beds,
  };
}

export function scenarioDocToForm(doc: ScenarioDoc): FormState {
  const rows: SpecialtyFormRow[] = doc.specialty_params.map((p) => ({
    specialty: p.specialty,
    registrations: p.registrations_per_5day,
    orCount: p.or_count,
    surgeryMean: p.surgery_mean,
    surgeryCv: cv(p.surgery_mean, p.surgery_std),
    losMean: p.los_mean,
    losCv: cv(p.los_mean, p.los_std),
    icuRatio: p.icu_fraction,
    icuLosMean: p.icu_mean,
    icuLosCv: cv(p.icu_mean, p.icu_std),
    admitAdvance: p.admit_advance,
  }));
  const wards = [...new Set(doc.beds.map((b) => b.ward))].sort((a, b) => a - b);
  const days = Math.max(0, ...doc.beds.map((b) => b.day));
  const beds = wards.map(() => new Array<number>(days).fill(0));
  for (const bed of doc.beds) {
    beds[wards.indexOf(bed.ward)]![bed.day - 1] = bed.available;
  }
  return {
    name: doc.name,
    horizon: doc.horizon,
    quotaPercent: doc.quota_percent,
    rows,
    wards,
    beds,
  };
}

export function bedGrid(form: FormState): Record<number, number[]> {
  const grid: Record<number, number[]> = {};
  form.wards.forEach((ward, w) => {
    grid[ward] = [...form.beds[w]!];
  });
  return grid;
}
