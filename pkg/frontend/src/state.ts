/** Form state round-trips through the URL query string so what-if links
 * can be shared; unknown or malformed parameters fall back to defaults. */

import { DRIVERS, Driver } from "./contract.js";
import { DEFAULT_FORM, EstimateForm } from "./form.js";

const KEYS = {
  model: "model",
  area_ha: "area",
  length_m: "length",
  valves: "valves",
  year: "year",
  inflationRate: "rate",
  toggles: "toggles",
  seed: "seed",
} as const;

export function formToQuery(form: EstimateForm): string {
  const params = new URLSearchParams();
  for (const field of [
    "model",
    "area_ha",
    "length_m",
    "valves",
    "year",
    "inflationRate",
    "seed",
  ] as const) {
    const value = form[field];
    if (value !== DEFAULT_FORM[field]) {
      params.set(KEYS[field], value);
    }
  }
  if (form.toggles.length > 0) {
    params.set(KEYS.toggles, form.toggles.join(","));
  }
  return params.toString();
}

function isDriver(name: string): name is Driver {
  return (DRIVERS as readonly string[]).includes(name);
}

export function formFromQuery(query: string): EstimateForm {
  const params = new URLSearchParams(query);
  const form: EstimateForm = { ...DEFAULT_FORM, toggles: [] };
  for (const field of [
    "model",
    "area_ha",
    "length_m",
    "valves",
    "year",
    "inflationRate",
    "seed",
  ] as const) {
    const value = params.get(KEYS[field]);
    if (value !== null) {
      form[field] = value;
    }
  }
  const toggles = params.get(KEYS.toggles);
  if (toggles !== null) {
    form.toggles = toggles
      .split(",")
      .map((t) => t.trim())
      .filter(isDriver);
  }
  return form;
}
