// Browser wiring: a small hash router over the scenario editor, the live
// run monitor, and the result charts. All data comes from the service API.

import { ApiClient } from "./api.js";
import { renderBedChart, renderOrChart } from "./charts.js";
import {
  FormState,
  bedGrid,
  formToScenarioDoc,
  scenarioDocToForm,
  validateForm,
} from "./form.js";
import { monitorRun } from "./poll.js";
import { PRESETS } from "./presets.js";
import { emptyRunView, renderRunView, runViewFromIncumbent } from "./run.js";
import type { JobResults, ScenarioDoc } from "./types.js";

const api = new ApiClient("");
const root = () => document.getElementById("app")!;

let activeMonitor: { stop(): void } | null = null;

function stopMonitor() {
  if (activeMonitor) {
    activeMonitor.stop();
    activeMonitor = null;
  }
}

async function showScenarios() {
  const { scenarios } = await api.listScenarios();
  const rows = scenarios
    .map(
      (s) => `
      <tr>
        <td>${s.name}</td>
        <td>${s.horizon} days</td>
        <td>
          <a href="#/edit/${s.id}">edit</a>
          <button data-run="${s.id}">run</button>
        </td>
      </tr>`,
    )
    .join("");
  root().innerHTML = `
    <h2>Scenarios</h2>
    <table class="list">
      <thead><tr><th>Name</th><th>Horizon</th><th></th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <p><a href="#/edit/scenario-a">New from Scenario A preset</a></p>`;
  root().querySelectorAll<HTMLButtonElement>("button[data-run]").forEach((button) => {
    button.addEventListener("click", async () => {
      const { id } = await api.submitSolve(button.dataset.run!, { time_limit: 60 });
      location.hash = `#/run/${id}`;
    });
  });
}

function formInputs(form: FormState): string {
  const rowInputs = form.rows
    .map((row, i) => {
      const cell = (field: keyof typeof row, step = "any") =>
        `<td><input id="rows-${i}-${String(field)}" type="number" step="${step}" value="${row[field]}"></td>`;
      return `<tr><th>Specialty ${row.specialty}</th>
        ${cell("registrations", "1")}${cell("orCount", "1")}
        ${cell("losMean")}${cell("losCv")}
        ${cell("surgeryMean")}${cell("surgeryCv")}
        ${cell("icuRatio")}${cell("icuLosMean")}${cell("icuLosCv")}
        ${cell("admitAdvance", "1")}</tr>`;
    })
    .join("");
  const grid = bedGrid(form);
  const bedRows = form.wards
    .map((ward, w) => {
      const cells = grid[ward]!
        .map(
          (value, d) =>
            `<td><input id="beds-${w}-${d}" type="number" step="1" value="${value}"></td>`,
        )
        .join("");
      const label = ward === 0 ? "ICU" : `Ward ${ward}`;
      return `<tr><th>${label}</th>${cells}</tr>`;
    })
    .join("");
  return `
    <p>
      <label>Name <input id="name" value="${form.name}"></label>
      <label>Horizon <input id="horizon" type="number" step="1" value="${form.horizon}"></label>
      <label>Bed quota % <input id="quotaPercent" type="number" step="1" value="${form.quotaPercent}"></label>
    </p>
    <h3>Registration generator</h3>
    <table class="grid">
      <thead><tr><th></th><th>Reg.</th><th>ORs</th><th>LOS mean</th><th>LOS CV</th>
        <th>Surgery mean</th><th>Surgery CV</th><th>ICU ratio</th><th>ICU LOS mean</th>
        <th>ICU LOS CV</th><th>Admit days before</th></tr></thead>
      <tbody>${rowInputs}</tbody>
    </table>
    <h3>Bed availability</h3>
    <table class="grid"><tbody>${bedRows}</tbody></table>
    <p>
      <button id="save">Save scenario</button>
      <span id="form-errors" class="errors"></span>
    </p>`;
}

function readForm(form: FormState): FormState {
  const num = (id: string) => Number((document.getElementById(id) as HTMLInputElement).value);
  const next: FormState = {
    name: (document.getElementById("name") as HTMLInputElement).value,
    horizon: num("horizon"),
    quotaPercent: num("quotaPercent"),
    wards: [...form.wards],
    rows: form.rows.map((row, i) => ({
      ...row,
      registrations: num(`rows-${i}-registrations`),
      orCount: num(`rows-${i}-orCount`),
      losMean: num(`rows-${i}-losMean`),
      losCv: num(`rows-${i}-losCv`),
      surgeryMean: num(`rows-${i}-surgeryMean`),
      surgeryCv: num(`rows-${i}-surgeryCv`),
      icuRatio: num(`rows-${i}-icuRatio`),
      icuLosMean: num(`rows-${i}-icuLosMean`),
      icuLosCv: num(`rows-${i}-icuLosCv`),
      admitAdvance: num(`rows-${i}-admitAdvance`),
    })),
    beds: form.beds.map((row, w) => row.map((_, d) => num(`beds-${w}-${d}`))),
  };
  return next;
}

async function showEditor(scenarioId: string) {
  let doc: ScenarioDoc;
  try {
    doc = await api.getScenario(scenarioId);
  } catch {
    doc = PRESETS[scenarioId] ?? PRESETS["scenario-a"]!;
  }
  const form = scenarioDocToForm(doc);
  root().innerHTML = `<h2>Edit scenario</h2>${formInputs(form)}`;
  document.getElementById("save")!.addEventListener("click", async () => {
    const edited = readForm(form);
    const errors = validateForm(edited);
    const errorBox = document.getElementById("form-errors")!;
    if (Object.keys(errors).length > 0) {
      errorBox.textContent = Object.entries(errors)
        .map(([field, message]) => `${field}: ${message}`)
        .join("; ");
      return;
    }
    errorBox.textContent = "";
    const { id } = await api.saveScenario(formToScenarioDoc(edited));
    location.hash = `#/edit/${id}`;
  });
}

function showRun(jobId: string) {
  stopMonitor();
  root().innerHTML = `<h2>Run ${jobId}</h2><div id="run"></div>`;
  const target = document.getElementById("run")!;
  target.innerHTML = renderRunView(emptyRunView("queued"), jobId);
  activeMonitor = monitorRun(api, jobId, {
    onIncumbent(entry, poll) {
      target.innerHTML = renderRunView(runViewFromIncumbent(entry, poll.state), jobId);
    },
    onTerminal(poll) {
      const last = poll.incumbents.at(-1);
      const view = last ? runViewFromIncumbent(last, poll.state) : emptyRunView(poll.state);
      target.innerHTML = renderRunView(view, jobId);
      if (poll.state === "failed" && poll.error) {
        target.insertAdjacentHTML(
          "beforeend",
          `<p class="errors">run failed: ${poll.error.code}</p>`,
        );
      }
    },
  });
}

async function showOrCharts(jobId: string) {
  const results: JobResults = await api.getResults(jobId);
  const options = results.or_schedule
    .map(
      (block, i) =>
        `<option value="${i}">day ${block.day}, session ${block.session}</option>`,
    )
    .join("");
  root().innerHTML = `
    <h2>OR schedules</h2>
    <p><label>Block <select id="block">${options}</select></label></p>
    <div id="chart"></div>`;
  const draw = () => {
    const index = Number((document.getElementById("block") as HTMLSelectElement).value);
    document.getElementById("chart")!.innerHTML = renderOrChart(results.or_schedule[index]!);
  };
  document.getElementById("block")!.addEventListener("change", draw);
  if (results.or_schedule.length > 0) {
    draw();
  }
}

async function showBedCharts(jobId: string) {
  const results: JobResults = await api.getResults(jobId);
  const options = results.occupancy
    .map((series, i) => {
      const label = series.ward === 0 ? "ICU" : `Ward ${series.ward}`;
      return `<option value="${i}">${label}</option>`;
    })
    .join("");
  root().innerHTML = `
    <h2>Bed occupancy</h2>
    <p><label>Ward <select id="ward">${options}</select></label></p>
    <div id="chart"></div>`;
  const draw = () => {
    const index = Number((document.getElementById("ward") as HTMLSelectElement).value);
    document.getElementById("chart")!.innerHTML = renderBedChart(results.occupancy[index]!);
  };
  document.getElementById("ward")!.addEventListener("change", draw);
  if (results.occupancy.length > 0) {
    draw();
  }
}

async function route() {
  stopMonitor();
  const hash = location.hash || "#/scenarios";
  const parts = hash.slice(2).split("/");
  try {
    if (parts[0] === "edit" && parts[1]) {
      await showEditor(parts[1]);
    } else if (parts[0] === "run" && parts[1]) {
      showRun(parts[1]);
    } else if (parts[0] === "results" && parts[1] && parts[2] === "or") {
      await showOrCharts(parts[1]);
    } else if (parts[0] === "results" && parts[1] && parts[2] === "beds") {
      await showBedCharts(parts[1]);
    } else {
      await showScenarios();
    }
  } catch (error) {
    root().innerHTML = `<p class="errors">${String(error)}</p>`;
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
