import { describe, expect, it } from "vitest";

import {
  bedGrid,
  formToScenarioDoc,
  scenarioDocToForm,
  validateForm,
} from "../src/form.js";
import { PRESETS } from "../src/presets.js";

// Published scenario-A bed rows the editor grid must reproduce.
const SCENARIO_A_GRID: Record<number, number[]> = {
  0: [40, 40, 40, 40, 40],
  1: [80, 80, 80, 80, 80],
  2: [58, 58, 58, 58, 58],
  3: [65, 65, 65, 65, 65],
  4: [57, 57, 57, 57, 57],
  5: [40, 40, 40, 40, 40],
};

describe("scenario presets", () => {
  it("scenario A preset renders the reference bed grid", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    expect(bedGrid(form)).toEqual(SCENARIO_A_GRID);
    expect(form.horizon).toBe(5);
    expect(form.rows.map((row) => row.registrations)).toEqual([80, 70, 70, 60, 70]);
  });

  it("presets B and C carry rising bed tables", () => {
    for (const key of ["scenario-b", "scenario-c"]) {
      const grid = bedGrid(scenarioDocToForm(PRESETS[key]!));
      for (const row of Object.values(grid)) {
        expect(row.length).toBe(5);
        expect([...row].sort((a, b) => a - b)).toEqual(row);
      }
    }
  });
});

describe("validation", () => {
  it("accepts every preset", () => {
    for (const doc of Object.values(PRESETS)) {
      expect(validateForm(scenarioDocToForm(doc))).toEqual({});
    }
  });

  it("rejects a negative ICU LOS mean", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    form.rows[0]!.icuLosMean = -1;
    const errors = validateForm(form);
    expect(errors["rows.0.icuLosMean"]).toMatch(/negative/);
  });

  it("rejects an ICU stay longer than the total stay", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    form.rows[1]!.icuLosMean = form.rows[1]!.losMean + 1;
    const errors = validateForm(form);
    expect(errors["rows.1.icuLosMean"]).toMatch(/cannot exceed/);
  });

  it("rejects fractional or negative bed counts", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    form.beds[0]![0] = -2;
    form.beds[1]![2] = 3.5;
    const errors = validateForm(form);
    expect(errors["beds.0.0"]).toBeDefined();
    expect(errors["beds.1.2"]).toBeDefined();
  });

  it("rejects an out-of-range quota", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    form.quotaPercent = 140;
    expect(validateForm(form)["quotaPercent"]).toBeDefined();
  });

  it("rejects NaN from an emptied input", () => {
    const form = scenarioDocToForm(PRESETS["scenario-a"]!);
    form.rows[0]!.surgeryMean = Number.NaN;
    expect(validateForm(form)["rows.0.surgeryMean"]).toMatch(/number/);
  });
});

describe("round trips", () => {
  it("form state survives save and reload exactly", () => {
    for (const doc of Object.values(PRESETS)) {
      const form = scenarioDocToForm(doc);
      const reloaded = scenarioDocToForm(formToScenarioDoc(form));
      expect(reloaded).toEqual(form);
    }
  });

  it("bed edits survive the round trip", () => {
    const form = scenarioDocToForm(PRESETS["scenario-b"]!);
    form.beds[2]![3] = 99;
    form.quotaPercent = 85;
    const reloaded = scenarioDocToForm(formToScenarioDoc(form));
    expect(reloaded.beds[2]![3]).toBe(99);
    expect(reloaded.quotaPercent).toBe(85);
  });
});
