// Chart builders. Each chart has a pure data-preparation step (tested
// directly) and an SVG renderer that only positions what the data says.

import type { OccupancySeries, OrBlock, OrSegment } from "./types.js";

export interface OrBarColumn {
  orId: number;
  capacity: number;
  usedMinutes: number;
  segments: OrSegment[];
}

export function orChartData(block: OrBlock): OrBarColumn[] {
  return block.ors.map((column) => ({
    orId: column.or_id,
    capacity: column.capacity,
    usedMinutes: column.segments.reduce((sum, segment) => sum + segment.minutes, 0),
    segments: column.segments,
  }));
}

export interface BedBar {
  day: number;
  prior: number;
  added: number;
  availableLine: number;
  quotaLine: number;
}

export function bedChartData(series: OccupancySeries): BedBar[] {
  return series.days.map((day) => ({
    day: day.day,
    prior: day.occupied_prior,
    added: day.occupied_new,
    availableLine: day.available,
    quotaLine: day.quota,
  }));
}

const PRIORITY_CLASS: Record<number, string> = { 1: "p1", 2: "p2", 3: "p3" };

export function renderOrChart(block: OrBlock, width = 640, height = 360): string {
  const columns = orChartData(block);
  if (columns.length === 0) {
    return `<svg class="or-chart" viewBox="0 0 ${width} ${height}"></svg>`;
  }
  const maxCapacity = Math.max(...columns.map((c) => c.capacity), 1);
  const plotHeight = height - 40;
  const columnWidth = width / columns.length;
  const barWidth = Math.min(60, columnWidth * 0.6);
  const scale = plotHeight / maxCapacity;

  const parts: string[] = [];
  columns.forEach((column, i) => {
    const x = i * columnWidth + (columnWidth - barWidth) / 2;
    const capacityTop = plotHeight - column.capacity * scale + 20;
    // Unused capacity: the visible gap between the segment stack and the
    // session's capacity outline.
    parts.push(
      `<rect class="capacity" x="${x}" y="${capacityTop}" width="${barWidth}" ` +
        `height="${column.capacity * scale}" />`,
    );
    let cursor = plotHeight + 20;
    for (const segment of column.segments) {
      const segmentHeight = segment.minutes * scale;
      cursor -= segmentHeight;
      parts.push(
        `<rect class="segment ${PRIORITY_CLASS[segment.priority] ?? "p3"}" x="${x}" y="${cursor}" ` +
          `width="${barWidth}" height="${segmentHeight}" data-registration="${segment.registration_id}" ` +
          `data-minutes="${segment.minutes}"><title>#${segment.registration_id}: ${segment.minutes} min</title></rect>`,
      );
    }
    parts.push(
      `<text class="axis" x="${x + barWidth / 2}" y="${height - 4}" text-anchor="middle">OR ${column.orId}</text>`,
    );
  });
  return `<svg class="or-chart" viewBox="0 0 ${width} ${height}">${parts.join("")}</svg>`;
}

export function renderBedChart(series: OccupancySeries, width = 640, height = 360): string {
  const bars = bedChartData(series);
  if (bars.length === 0) {
    return `<svg class="bed-chart" viewBox="0 0 ${width} ${height}"></svg>`;
  }
  const maxY = Math.max(...bars.map((b) => Math.max(b.availableLine, b.prior + b.added)), 1);
  const plotHeight = height - 40;
  const columnWidth = width / bars.length;
  const barWidth = Math.min(60, columnWidth * 0.6);
  const scale = plotHeight / maxY;
  const y = (value: number) => plotHeight - value * scale + 20;

  const parts: string[] = [];
  bars.forEach((bar, i) => {
    const x = i * columnWidth + (columnWidth - barWidth) / 2;
    const priorHeight = bar.prior * scale;
    const addedHeight = bar.added * scale;
    parts.push(
      `<rect class="prior" x="${x}" y="${y(bar.prior)}" width="${barWidth}" height="${priorHeight}" ` +
        `data-day="${bar.day}" data-occupied="${bar.prior}" />`,
      `<rect class="added" x="${x}" y="${y(bar.prior + bar.added)}" width="${barWidth}" height="${addedHeight}" ` +
        `data-day="${bar.day}" data-occupied="${bar.added}" />`,
    );
    const left = i * columnWidth + columnWidth * 0.1;
    const right = (i + 1) * columnWidth - columnWidth * 0.1;
    parts.push(
      `<line class="available" x1="${left}" y1="${y(bar.availableLine)}" x2="${right}" y2="${y(bar.availableLine)}" />`,
      `<line class="quota" stroke-dasharray="6 4" x1="${left}" y1="${y(bar.quotaLine)}" x2="${right}" y2="${y(bar.quotaLine)}" />`,
      `<text class="axis" x="${(left + right) / 2}" y="${height - 4}" text-anchor="middle">day ${bar.day}</text>`,
    );
  });
  return `<svg class="bed-chart" viewBox="0 0 ${width} ${height}">${parts.join("")}</svg>`;
}
