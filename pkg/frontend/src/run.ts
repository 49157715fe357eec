// Live run view: three priority cards plus the OR-time summary bar, all
// bound to the latest incumbent's metrics exactly as the service reports
// them.

import type { IncumbentEntry, JobState, MetricsPayload } from "./types.js";

export interface PriorityCard {
  label: string;
  assigned: number;
  total: number;
  percent: number;
}

export interface RunView {
  cards: PriorityCard[];
  orTimePercent: number | null;
  bedOccupancyPercent: number | null;
  state: JobState;
  incumbentIndex: number;
}

const LABELS = ["Priority 1", "Priority 2", "Priority 3"];

export function emptyRunView(state: JobState = "running"): RunView {
  return {
    cards: LABELS.map((label) => ({ label, assigned: 0, total: 0, percent: 0 })),
    orTimePercent: null,
    bedOccupancyPercent: null,
    state,
    incumbentIndex: 0,
  };
}

export function runViewFromMetrics(
  metrics: MetricsPayload,
  state: JobState,
  incumbentIndex: number,
): RunView {
  const cards = metrics.assigned_by_priority.map(([assigned, total], i) => ({
    label: LABELS[i] ?? `Priority ${i + 1}`,
    assigned,
    total,
    percent: total > 0 ? (assigned / total) * 100 : 0,
  }));
  return {
    cards,
    orTimePercent: metrics.or_time_efficiency * 100,
    bedOccupancyPercent: metrics.bed_occupancy_efficiency * 100,
    state,
    incumbentIndex,
  };
}

export function runViewFromIncumbent(
  entry: IncumbentEntry,
  state: JobState,
): RunView {
  if (!entry.metrics) {
    return emptyRunView(state);
  }
  return runViewFromMetrics(entry.metrics, state, entry.index);
}

function formatPercent(value: number): string {
  return `${value.toFixed(1)}%`;
}

export function renderRunView(view: RunView, jobId: string): string {
  const cards = view.cards
    .map(
      (card) => `
    <div class="card">
      <h3>${card.label}</h3>
      <p class="count">${card.assigned} / ${card.total}</p>
      <div class="progress"><div class="bar" style="width:${card.percent.toFixed(1)}%"></div></div>
      <p class="pct">${formatPercent(card.percent)}</p>
    </div>`,
    )
    .join("\n");
  const spinner =
    view.state === "running" || view.state === "queued"
      ? '<p class="spinner">solving…</p>'
      : "";
  const orBar =
    view.orTimePercent === null
      ? ""
      : `
    <div class="summary">
      <h3>OR time used</h3>
      <div class="progress"><div class="bar or" style="width:${view.orTimePercent.toFixed(1)}%"></div></div>
      <p class="pct">${formatPercent(view.orTimePercent)}</p>
    </div>`;
  const links =
    view.state === "done"
      ? `<p class="links">
          <a href="#/results/${jobId}/or">OR schedules</a>
          <a href="#/results/${jobId}/beds">Bed occupancy</a>
        </p>`
      : "";
  return `
  <section class="run-view" data-state="${view.state}" data-incumbent="${view.incumbentIndex}">
    <div class="cards">${cards}</div>
    ${orBar}
    ${spinner}
    ${links}
  </section>`;
}
