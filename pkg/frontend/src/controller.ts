/** Orchestration between form state, the client, and the renderers.
 * Invalid forms never reach the network. */

import { EstimatorClient, PredictOutcome } from "./api.js";
import { ModelEntry, Prediction, TRAINING_YEAR_HORIZON } from "./contract.js";
import { buildRequest, EstimateForm, validateForm } from "./form.js";
import { CompareRow } from "./view.js";

export type SubmitResult =
  | { kind: "invalid"; errors: Record<string, string> }
  | PredictOutcome;

export async function submitEstimate(
  form: EstimateForm,
  client: EstimatorClient,
  horizon: number = TRAINING_YEAR_HORIZON,
): Promise<SubmitResult> {
  const validation = validateForm(form, horizon);
  if (!validation.valid) {
    return { kind: "invalid", errors: validation.errors };
  }
  return client.predict(buildRequest(form, horizon));
}

export type CompareResult =
  | { kind: "empty" }
  | { kind: "rows"; rows: CompareRow[] }
  | { kind: "transport"; message: string };

/** One base prediction per served model, using the form's inputs without
 * scenario toggles so the rows stay directly comparable. */
export async function compareModels(
  form: EstimateForm,
  client: EstimatorClient,
  horizon: number = TRAINING_YEAR_HORIZON,
): Promise<CompareResult> {
  let entries: ModelEntry[];
  try {
    entries = await client.models();
  } catch (error) {
    return {
      kind: "transport",
      message: error instanceof Error ? error.message : String(error),
    };
  }
  if (entries.length === 0) {
    return { kind: "empty" };
  }
  const baseForm: EstimateForm = { ...form, toggles: [] };
  const rows: CompareRow[] = [];
  for (const entry of entries) {
    const outcome = await client.predict(
      buildRequest({ ...baseForm, model: entry.kind }, horizon),
    );
    if (outcome.kind === "ok") {
      rows.push({ entry, prediction: outcome.prediction });
    } else if (outcome.kind === "transport") {
      return { kind: "transport", message: outcome.message };
    } else if (outcome.kind === "fieldErrors" || outcome.kind === "serviceError") {
      // A model that rejects the shared inputs is skipped rather than
      // blocking the rest of the comparison.
      continue;
    }
  }
  return { kind: "rows", rows };
}

export function scenarioBlockOf(prediction: Prediction) {
  return prediction.scenarios ?? null;
}
