// Pure submission-building logic shared by the upload pages.

export function parseJsonl(text: string): Record<string, unknown>[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter(Boolean)
    .map((line) => JSON.parse(line) as Record<string, unknown>);
}

export interface LlmSubmissionBody {
  submission_id: string;
  model_name: string;
  responses: Record<string, unknown>[];
  publish: boolean;
}

export function buildLlmSubmission(
  rows: Record<string, unknown>[],
  submissionId: string,
  publish: boolean,
): LlmSubmissionBody {
  const header = rows[0] ?? {};
  return {
    submission_id: submissionId,
    model_name: String(header.model_name ?? "unnamed"),
    responses: rows.slice(1),
    publish,
  };
}

export interface CheckerSubmissionBody {
  submission_id: string;
  system_name: string;
  dataset_id: string;
  predictions: Record<string, unknown>[];
  total_latency_s: number;
  total_cost_usd: number;
  publish: boolean;
}

export function buildCheckerSubmission(
  rows: Record<string, unknown>[],
  submissionId: string,
  systemName: string,
  publish: boolean,
): CheckerSubmissionBody {
  const header = rows[0] ?? {};
  const hasHeader = !("id" in header);
  return {
    submission_id: submissionId,
    system_name: systemName,
    dataset_id: String(header.dataset_id ?? "factbench"),
    predictions: hasHeader ? rows.slice(1) : rows,
    total_latency_s: Number(header.total_latency_s ?? 0),
    total_cost_usd: Number(header.total_cost_usd ?? 0),
    publish,
  };
}
