/** Browser bootstrap: binds the static form to the pure modules.  All
 * logic lives in the imported modules; this file only moves strings
 * between the DOM and them. */

import { EstimatorClient } from "./api.js";
import { resolveBaseUrl } from "./config.js";
import { DRIVERS, TRAINING_YEAR_HORIZON } from "./contract.js";
import { compareModels, submitEstimate } from "./controller.js";
import {
  canSubmit,
  DEFAULT_FORM,
  EstimateForm,
  inflationFieldVisible,
} from "./form.js";
import { formFromQuery, formToQuery } from "./state.js";
import {
  renderBanner,
  renderCompareDisabled,
  renderCompareTable,
  renderFieldErrors,
  renderModelOptions,
  renderPrediction,
  renderScenarios,
} from "./view.js";

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function readForm(): EstimateForm {
  return {
    model: element<HTMLSelectElement>("model").value || DEFAULT_FORM.model,
    area_ha: element<HTMLInputElement>("area_ha").value,
    length_m: element<HTMLInputElement>("length_m").value,
    valves: element<HTMLInputElement>("valves").value,
    year: element<HTMLInputElement>("year").value,
    inflationRate: element<HTMLInputElement>("inflation_rate").value,
    toggles: DRIVERS.filter(
      (d) => element<HTMLInputElement>(`toggle-${d}`).checked,
    ),
    seed: element<HTMLInputElement>("seed").value || DEFAULT_FORM.seed,
  };
}

function writeForm(form: EstimateForm): void {
  element<HTMLSelectElement>("model").value = form.model;
  element<HTMLInputElement>("area_ha").value = form.area_ha;
  element<HTMLInputElement>("length_m").value = form.length_m;
  element<HTMLInputElement>("valves").value = form.valves;
  element<HTMLInputElement>("year").value = form.year;
  element<HTMLInputElement>("inflation_rate").value = form.inflationRate;
  element<HTMLInputElement>("seed").value = form.seed;
  for (const driver of DRIVERS) {
    element<HTMLInputElement>(`toggle-${driver}`).checked =
      form.toggles.includes(driver);
  }
}

function refreshControls(form: EstimateForm): void {
  element<HTMLButtonElement>("submit").disabled = !canSubmit(form);
  element<HTMLElement>("inflation-row").hidden = !inflationFieldVisible(form);
  history.replaceState(null, "", `?${formToQuery(form)}`);
}

async function main(): Promise<void> {
  const meta = document.querySelector('meta[name="estimator-base-url"]');
  const client = new EstimatorClient(
    resolveBaseUrl(meta?.getAttribute("content")),
  );

  const form = formFromQuery(location.search);
  writeForm(form);
  refreshControls(form);

  try {
    const models = await client.models();
    element<HTMLSelectElement>("model").innerHTML = renderModelOptions(
      models,
      form.model,
    );
  } catch {
    element<HTMLElement>("status").innerHTML = renderBanner(
      "Could not reach the estimation service; check the base URL.",
    );
  }

  const onChange = () => refreshControls(readForm());
  for (const id of [
    "model",
    "area_ha",
    "length_m",
    "valves",
    "year",
    "inflation_rate",
    "seed",
    ...DRIVERS.map((d) => `toggle-${d}`),
  ]) {
    element(id).addEventListener("input", onChange);
    element(id).addEventListener("change", onChange);
  }

  element("submit").addEventListener("click", async () => {
    const current = readForm();
    refreshControls(current);
    const status = element<HTMLElement>("status");
    const panel = element<HTMLElement>("prediction");
    const scenarios = element<HTMLElement>("scenarios");
    status.innerHTML = "";
    const result = await submitEstimate(current, client);
    if (result.kind === "invalid" || result.kind === "fieldErrors") {
      status.innerHTML = renderFieldErrors(result.errors);
      return;
    }
    if (result.kind === "serviceError") {
      status.innerHTML = renderBanner(result.message);
      return;
    }
    if (result.kind === "transport") {
      status.innerHTML = renderBanner(result.message);
      return;
    }
    if (result.kind === "superseded") {
      return;
    }
    panel.innerHTML = renderPrediction(result.prediction);
    scenarios.innerHTML = result.prediction.scenarios
      ? renderScenarios(result.prediction.scenarios)
      : "";
  });

  element("compare").addEventListener("click", async () => {
    const current = readForm();
    const target = element<HTMLElement>("comparison");
    const result = await compareModels(current, client);
    if (result.kind === "transport") {
      target.innerHTML = renderBanner(result.message);
    } else if (result.kind === "empty") {
      target.innerHTML = renderCompareDisabled();
    } else {
      target.innerHTML = renderCompareTable(result.rows);
    }
  });
}

main().catch((error) => {
  console.error(error);
});

export { TRAINING_YEAR_HORIZON };
