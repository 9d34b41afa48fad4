// REST client plus client-side form validation mirroring RunConfig ranges.

import type { FieldError, GraphDoc, RunForm, TopographyResponse } from "./types.js";

export const PER_SOURCE_HARD_CAP = 500;

export function validateForm(form: RunForm): FieldError[] {
  const errors: FieldError[] = [];
  if (!form.zone.trim()) {
    errors.push({ field: "zone", reason: "phenomenon zone must be non-empty" });
  }
  if (
    !Number.isFinite(form.per_source_limit) ||
    form.per_source_limit < 0 ||
    form.per_source_limit > PER_SOURCE_HARD_CAP
  ) {
    errors.push({
      field: "per_source_limit",
      reason: `must be between 0 and ${PER_SOURCE_HARD_CAP}`,
    });
  }
  if (form.max_reentries < 0) {
    errors.push({ field: "max_reentries", reason: "must be >= 0" });
  }
  if (form.centralization_threshold < 0 || form.centralization_threshold > 1) {
    errors.push({ field: "centralization_threshold", reason: "must be within [0, 1]" });
  }
  if (form.provider_kind === "live-http" && !form.endpoint) {
    errors.push({ field: "endpoint", reason: "live provider needs an endpoint" });
  }
  if (form.provider_kind === "fixture" && !form.fixture_path) {
    errors.push({ field: "fixture_path", reason: "fixture provider needs a path" });
  }
  return errors;
}

export function formToConfig(form: RunForm): Record<string, unknown> {
  const provider =
    form.provider_kind === "fixture"
      ? { kind: "fixture", fixture_path: form.fixture_path }
      : { kind: "live-http", endpoint: form.endpoint };
  return {
    zone: form.zone,
    per_source_limit: form.per_source_limit,
    max_reentries: form.max_reentries,
    centralization_threshold: form.centralization_threshold,
    provider,
  };
}

export type LaunchResult =
  | { ok: true; runId: string }
  | { ok: false; errors: FieldError[] };

export async function launchRun(
  baseUrl: string,
  form: RunForm,
  fetcher: typeof fetch = fetch,
): Promise<LaunchResult> {
  const clientErrors = validateForm(form);
  if (clientErrors.length > 0) {
    return { ok: false, errors: clientErrors };
  }
  const response = await fetcher(`${baseUrl}/runs`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(formToConfig(form)),
  });
  const body = await response.json();
  if (!response.ok) {
    return { ok: false, errors: body.errors ?? [{ field: "config", reason: "rejected" }] };
  }
  return { ok: true, runId: body.run_id };
}

export async function fetchGraph(
  baseUrl: string,
  runId: string,
  fetcher: typeof fetch = fetch,
): Promise<GraphDoc> {
  const response = await fetcher(`${baseUrl}/runs/${runId}/graph`);
  if (!response.ok) throw new Error(`graph fetch failed: ${response.status}`);
  return (await response.json()) as GraphDoc;
}

export async function fetchTopography(
  baseUrl: string,
  runId: string,
  fetcher: typeof fetch = fetch,
): Promise<TopographyResponse> {
  const response = await fetcher(`${baseUrl}/runs/${runId}/topography`);
  if (!response.ok) throw new Error(`topography fetch failed: ${response.status}`);
  return (await response.json()) as TopographyResponse;
}

export async function fetchCartography(
  baseUrl: string,
  runId: string,
  fetcher: typeof fetch = fetch,
): Promise<Record<string, any>> {
  const response = await fetcher(`${baseUrl}/runs/${runId}/cartography`);
  if (!response.ok) throw new Error(`cartography fetch failed: ${response.status}`);
  return await response.json();
}
