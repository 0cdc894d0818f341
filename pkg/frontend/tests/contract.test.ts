import { describe, expect, it } from "vitest";
import { z } from "zod";

import {
  parseErrorBody,
  parseModelList,
  parsePrediction,
} from "../src/contract.js";
import { fixture } from "./helpers.js";

// Independent schema for the service responses; the recorded fixtures must
// satisfy both this and the hand-rolled guards the console ships.
const scenarioSchema = z.strictObject({
  values: z.array(z.number()),
  mean: z.number(),
  sd: z.number(),
});
const predictionSchema = z.strictObject({
  cost_le: z.number(),
  cost_per_hectare: z.number(),
  scenarios: scenarioSchema.optional(),
});
const modelListSchema = z.array(
  z.strictObject({
    kind: z.string(),
    transformation: z.string().nullable(),
    metrics: z.record(z.string(), z.unknown()),
  }),
);

describe("recorded service responses", () => {
  it("base prediction fixture matches the contract", () => {
    const raw = fixture("predict_base.json");
    predictionSchema.parse(raw);
    const parsed = parsePrediction(raw);
    expect(parsed.cost_le).toBeGreaterThan(0);
    expect(parsed.scenarios).toBeUndefined();
  });

  it("toggled prediction fixture carries a 30-value spread", () => {
    const raw = fixture("predict_toggled.json");
    predictionSchema.parse(raw);
    const parsed = parsePrediction(raw);
    expect(parsed.scenarios?.values).toHaveLength(30);
    expect(parsed.scenarios?.sd).toBeGreaterThan(0);
  });

  it("model list fixture names all four kinds", () => {
    const raw = fixture("models.json");
    modelListSchema.parse(raw);
    const models = parseModelList(raw);
    expect(models.map((m) => m.kind)).toEqual([
      "cbr",
      "fuzzy",
      "mlp",
      "regression",
    ]);
  });
});

describe("guards", () => {
  it("rejects predictions without both cost fields", () => {
    expect(() => parsePrediction({ cost_le: 1 })).toThrow(TypeError);
    expect(() => parsePrediction(null)).toThrow(TypeError);
    expect(() =>
      parsePrediction({ cost_le: 1, cost_per_hectare: "x" }),
    ).toThrow(TypeError);
  });

  it("rejects malformed scenario blocks", () => {
    expect(() =>
      parsePrediction({
        cost_le: 1,
        cost_per_hectare: 1,
        scenarios: { values: [1, "b"], mean: 1, sd: 0 },
      }),
    ).toThrow(TypeError);
  });

  it("rejects model entries without a kind", () => {
    expect(() => parseModelList([{ metrics: {} }])).toThrow(TypeError);
    expect(() => parseModelList({})).toThrow(TypeError);
  });

  it("classifies service error bodies", () => {
    expect(parseErrorBody({ errors: { area_ha: "must be positive" } })).toEqual(
      { kind: "fieldErrors", errors: { area_ha: "must be positive" } },
    );
    expect(parseErrorBody({ error: "out-of-range prediction" })).toEqual({
      kind: "serviceError",
      message: "out-of-range prediction",
    });
    expect(parseErrorBody("nope")).toBeNull();
    expect(parseErrorBody({})).toBeNull();
  });
});
