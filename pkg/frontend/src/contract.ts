/** Types and runtime guards for the estimation service's JSON contract.
 *
 * The console performs no numerical modeling: every figure it shows is a
 * field from one of these response shapes, validated here at the boundary.
 */

export interface ScenarioBlock {
  values: number[];
  mean: number;
  sd: number;
}

export interface Prediction {
  cost_le: number;
  cost_per_hectare: number;
  scenarios?: ScenarioBlock;
}

export interface ModelEntry {
  kind: string;
  transformation: string | null;
  metrics: Record<string, unknown>;
}

export type FieldErrors = Record<string, string>;

/** Latest construction year in the service's training data.  The service
 * caps model inputs at this year and compounds inflation beyond it, so the
 * inflation-rate field is only meaningful for later years.  Not exposed by
 * the HTTP contract; fixed alongside the driver schema below. */
export const TRAINING_YEAR_HORIZON = 2015;

/** Driver fields in the order the service expects them. */
export const DRIVERS = ["area_ha", "length_m", "valves", "year"] as const;
export type Driver = (typeof DRIVERS)[number];

export const DRIVER_LABELS: Record<Driver, string> = {
  area_ha: "Served area (ha)",
  length_m: "Total pipeline length (m)",
  valves: "Number of irrigation valves",
  year: "Construction year",
};

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function parseScenarioBlock(raw: unknown): ScenarioBlock {
  if (!isRecord(raw)) {
    throw new TypeError("scenario block must be an object");
  }
  const { values, mean, sd } = raw;
  if (!Array.isArray(values) || !values.every(isFiniteNumber)) {
    throw new TypeError("scenario values must be numbers");
  }
  if (!isFiniteNumber(mean) || !isFiniteNumber(sd)) {
    throw new TypeError("scenario mean and sd must be numbers");
  }
  return { values: values.slice(), mean, sd };
}

export function parsePrediction(raw: unknown): Prediction {
  if (!isRecord(raw)) {
    throw new TypeError("prediction must be an object");
  }
  if (!isFiniteNumber(raw.cost_le) || !isFiniteNumber(raw.cost_per_hectare)) {
    throw new TypeError("prediction must carry cost_le and cost_per_hectare");
  }
  const prediction: Prediction = {
    cost_le: raw.cost_le,
    cost_per_hectare: raw.cost_per_hectare,
  };
  if (raw.scenarios !== undefined) {
    prediction.scenarios = parseScenarioBlock(raw.scenarios);
  }
  return prediction;
}

export function parseModelList(raw: unknown): ModelEntry[] {
  if (!Array.isArray(raw)) {
    throw new TypeError("model list must be an array");
  }
  return raw.map((entry) => {
    if (!isRecord(entry) || typeof entry.kind !== "string") {
      throw new TypeError("model entry must carry a kind");
    }
    const transformation =
      typeof entry.transformation === "string" ? entry.transformation : null;
    const metrics = isRecord(entry.metrics) ? entry.metrics : {};
    return { kind: entry.kind, transformation, metrics };
  });
}

export type ServiceError =
  | { kind: "fieldErrors"; errors: FieldErrors }
  | { kind: "serviceError"; message: string };

/** Interpret an HTTP 400 body: either per-field errors or one message. */
export function parseErrorBody(raw: unknown): ServiceError | null {
  if (!isRecord(raw)) {
    return null;
  }
  if (isRecord(raw.errors)) {
    const errors: FieldErrors = {};
    for (const [field, message] of Object.entries(raw.errors)) {
      errors[field] = String(message);
    }
    return { kind: "fieldErrors", errors };
  }
  if (typeof raw.error === "string") {
    return { kind: "serviceError", message: raw.error };
  }
  return null;
}
