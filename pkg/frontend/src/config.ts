/** Runtime configuration: the service base URL is the console's single
 * setting, read from a `<meta name="estimator-base-url">` tag at startup. */

export const DEFAULT_BASE_URL = "http://127.0.0.1:8765";

export function resolveBaseUrl(setting: string | null | undefined): string {
  const trimmed = (setting ?? "").trim();
  if (trimmed === "") {
    return DEFAULT_BASE_URL;
  }
  return trimmed.replace(/\/+$/, "");
}
