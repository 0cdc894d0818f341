/** HTTP client for the estimation service.
 *
 * One in-flight prediction at a time: a new submission aborts the pending
 * one, whose outcome is reported as "superseded" and never rendered.
 */

import {
  ModelEntry,
  parseErrorBody,
  parseModelList,
  parsePrediction,
  Prediction,
} from "./contract.js";
import { PredictRequest } from "./form.js";

export type PredictOutcome =
  | { kind: "ok"; prediction: Prediction }
  | { kind: "fieldErrors"; errors: Record<string, string> }
  | { kind: "serviceError"; message: string }
  | { kind: "transport"; message: string }
  | { kind: "superseded" };

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class EstimatorClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async models(): Promise<ModelEntry[]> {
    const response = await this.fetchFn(`${this.baseUrl}/models`);
    if (!response.ok) {
      throw new Error(`model listing failed with status ${response.status}`);
    }
    return parseModelList(await response.json());
  }

  async predict(request: PredictRequest): Promise<PredictOutcome> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/predict`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
    } catch (error) {
      if (controller.signal.aborted) {
        return { kind: "superseded" };
      }
      return { kind: "transport", message: describe(error) };
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
    if (response.status === 400) {
      const body = await response.json().catch(() => null);
      const parsed = parseErrorBody(body);
      if (parsed !== null) {
        return parsed;
      }
      return { kind: "transport", message: "malformed service error" };
    }
    if (!response.ok) {
      return {
        kind: "transport",
        message: `prediction failed with status ${response.status}`,
      };
    }
    try {
      return { kind: "ok", prediction: parsePrediction(await response.json()) };
    } catch (error) {
      return { kind: "transport", message: describe(error) };
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof Error) {
    return error.message;
  }
  return String(error);
}
