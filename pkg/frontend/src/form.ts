/** Estimate form state, validation, and request construction.
 *
 * Field values stay as raw input strings so partially typed numbers render
 * back faithfully; validation and the request builder parse them.
 */

import {
  DRIVERS,
  Driver,
  TRAINING_YEAR_HORIZON,
} from "./contract.js";

export interface EstimateForm {
  model: string;
  area_ha: string;
  length_m: string;
  valves: string;
  year: string;
  /** Annual percentage applied beyond the training horizon; blank = none. */
  inflationRate: string;
  /** Drivers whose uncertainty boxes are checked. */
  toggles: Driver[];
  seed: string;
}

export const DEFAULT_FORM: EstimateForm = {
  model: "regression",
  area_ha: "",
  length_m: "",
  valves: "",
  year: "",
  inflationRate: "",
  toggles: [],
  seed: "0",
};

/** How many scenario draws a rerun with toggles requests. */
export const SCENARIO_COUNT = 30;

export interface ValidationResult {
  valid: boolean;
  errors: Record<string, string>;
}

function parseNumber(text: string): number {
  const trimmed = text.trim();
  if (trimmed === "") {
    return Number.NaN;
  }
  return Number(trimmed);
}

function parseSeed(text: string): number {
  const trimmed = text.trim();
  if (!/^[-+]?\d+$/.test(trimmed)) {
    return Number.NaN;
  }
  return Number(trimmed);
}

export function inflationFieldVisible(
  form: EstimateForm,
  horizon: number = TRAINING_YEAR_HORIZON,
): boolean {
  const year = parseNumber(form.year);
  return Number.isFinite(year) && year > horizon;
}

export function validateForm(
  form: EstimateForm,
  horizon: number = TRAINING_YEAR_HORIZON,
): ValidationResult {
  const errors: Record<string, string> = {};
  for (const field of ["area_ha", "length_m", "valves"] as const) {
    const value = parseNumber(form[field]);
    if (!Number.isFinite(value) || value <= 0) {
      errors[field] = "enter a positive number";
    }
  }
  const year = parseNumber(form.year);
  if (!Number.isFinite(year)) {
    errors.year = "enter a year";
  }
  if (!Number.isFinite(parseSeed(form.seed))) {
    errors.seed = "enter a whole number";
  }
  if (inflationFieldVisible(form, horizon) && form.inflationRate.trim() !== "") {
    const rate = parseNumber(form.inflationRate);
    if (!Number.isFinite(rate) || rate <= -100) {
      errors.inflationRate = "enter a percentage above -100";
    }
  }
  if (form.model.trim() === "") {
    errors.model = "choose a model";
  }
  return { valid: Object.keys(errors).length === 0, errors };
}

export function canSubmit(
  form: EstimateForm,
  horizon: number = TRAINING_YEAR_HORIZON,
): boolean {
  return validateForm(form, horizon).valid;
}

export interface PredictRequest {
  model: string;
  area_ha: number;
  length_m: number;
  valves: number;
  year: number;
  seed: number;
  inflation_rate?: number;
  toggles?: string[];
  scenarios?: number;
}

/** Build the /predict body.  The seed is always sent explicitly; toggles
 * imply a fixed scenario count so reruns are comparable. */
export function buildRequest(
  form: EstimateForm,
  horizon: number = TRAINING_YEAR_HORIZON,
): PredictRequest {
  const request: PredictRequest = {
    model: form.model,
    area_ha: parseNumber(form.area_ha),
    length_m: parseNumber(form.length_m),
    valves: parseNumber(form.valves),
    year: parseNumber(form.year),
    seed: parseSeed(form.seed),
  };
  if (inflationFieldVisible(form, horizon) && form.inflationRate.trim() !== "") {
    request.inflation_rate = parseNumber(form.inflationRate);
  }
  if (form.toggles.length > 0) {
    request.toggles = DRIVERS.filter((d) => form.toggles.includes(d));
    request.scenarios = SCENARIO_COUNT;
  }
  return request;
}
