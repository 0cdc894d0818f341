/** HTML renderers.  All pure functions from service data to markup; the
 * exact response numbers ride along in data-raw attributes so every shown
 * figure is traceable to a service field. */

import { renderChart } from "./chart.js";
import {
  FieldErrors,
  ModelEntry,
  Prediction,
  ScenarioBlock,
} from "./contract.js";
import { escapeHtml, formatLE, formatLEPerHectare } from "./format.js";

export function renderPrediction(prediction: Prediction): string {
  return (
    `<div class="prediction-readouts">` +
    `<p class="readout cost" data-raw="${prediction.cost_le}">` +
    `Estimated cost: <strong>${formatLE(prediction.cost_le)}</strong></p>` +
    `<p class="readout per-hectare" data-raw="${prediction.cost_per_hectare}">` +
    `Per hectare: <strong>${formatLEPerHectare(prediction.cost_per_hectare)}</strong></p>` +
    `</div>`
  );
}

export function renderScenarios(block: ScenarioBlock): string {
  return (
    `<div class="scenario-view">` +
    renderChart(block.values, block.mean) +
    `<p class="readout spread-mean" data-raw="${block.mean}">` +
    `Scenario mean: <strong>${formatLE(block.mean)}</strong></p>` +
    `<p class="readout spread-sd" data-raw="${block.sd}">` +
    `Scenario sd: <strong>${formatLE(block.sd)}</strong></p>` +
    `<p class="spread-count">${block.values.length} scenarios</p>` +
    `</div>`
  );
}

export function renderFieldErrors(errors: FieldErrors): string {
  const items = Object.entries(errors)
    .map(
      ([field, message]) =>
        `<li data-field="${escapeHtml(field)}">${escapeHtml(field)}: ${escapeHtml(message)}</li>`,
    )
    .join("");
  return `<ul class="field-errors">${items}</ul>`;
}

export function renderBanner(message: string): string {
  return (
    `<div class="banner error" role="alert">${escapeHtml(message)} ` +
    `<button type="button" class="retry">Retry</button></div>`
  );
}

export function renderModelOptions(
  models: ModelEntry[],
  selected: string,
): string {
  return models
    .map((m) => {
      const chosen = m.kind === selected ? " selected" : "";
      return `<option value="${escapeHtml(m.kind)}"${chosen}>${escapeHtml(m.kind)}</option>`;
    })
    .join("");
}

/** Badge text for a model's stored error statistic, when it stores one. */
export function mapeBadge(metrics: Record<string, unknown>): string {
  const value = metrics["mape"];
  if (typeof value === "number" && Number.isFinite(value)) {
    return `MAPE ${value.toFixed(1)}%`;
  }
  return "MAPE n/a";
}

export interface CompareRow {
  entry: ModelEntry;
  prediction: Prediction;
}

export function renderCompareTable(rows: CompareRow[]): string {
  if (rows.length === 0) {
    return renderCompareDisabled();
  }
  const body = rows
    .map(
      (row) =>
        `<tr data-model="${escapeHtml(row.entry.kind)}">` +
        `<td class="model">${escapeHtml(row.entry.kind)}</td>` +
        `<td class="cost" data-raw="${row.prediction.cost_le}">${formatLE(row.prediction.cost_le)}</td>` +
        `<td class="badge">${escapeHtml(mapeBadge(row.entry.metrics))}</td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="compare-table">` +
    `<thead><tr><th>Model</th><th>Estimate</th><th>Accuracy</th></tr></thead>` +
    `<tbody>${body}</tbody></table>`
  );
}

export function renderCompareDisabled(): string {
  return (
    `<div class="compare-disabled" aria-disabled="true">` +
    `No models are loaded on the service; start it with at least one model file.` +
    `</div>`
  );
}
