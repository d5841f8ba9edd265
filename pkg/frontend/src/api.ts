// Typed client for the fact-checking service HTTP API. The UI displays only
// what these payloads carry; it never computes metrics or verdicts itself.

export interface SolverInfo {
  key: string;
  kind: string;
  input_type: string;
  output_type: string;
}

export interface ClaimView {
  id: string;
  text: string;
  origin: string;
  source_sentence_index: number | null;
}

export interface EvidenceView {
  id: string;
  claim_id: string;
  text: string;
  source: string;
  rank: number;
  score: number;
}

export interface VerdictView {
  claim_id: string;
  label: string;
  rationale: string;
  confidence: number | null;
  evidence_ids: string[];
}

export interface TraceView {
  solver_name: string;
  succeeded: boolean;
  duration_ms: number;
  tokens_in: number;
  tokens_out: number;
  searches: number;
  cost_usd: string;
  note: string | null;
}

export interface CheckStateView {
  document: string;
  claims: ClaimView[];
  evidence: Record<string, EvidenceView[]>;
  verdicts: Record<string, VerdictView>;
  document_verdict: VerdictView | null;
  success: boolean;
  trace?: TraceView[];
  total_cost_usd?: string;
}

export interface JobView {
  job_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  created_at: string;
  result: Record<string, unknown> | null;
  error: string | null;
}

export interface CheckerLeaderboardEntry {
  rank: number;
  submission_id: string;
  system_name: string;
  dataset_id: string;
  metrics: {
    per_label: Record<string, { precision: number; recall: number; f1: number; support: number }>;
    accuracy: number;
    macro_f1: number;
    excluded_unknown_count: number;
    n_scored: number;
  };
  total_cost_usd: number;
  total_latency_s: number;
  submitted_at: string;
  self_reported_badge: string;
}

export interface LlmLeaderboardEntry {
  rank: number;
  submission_id: string;
  model_name: string;
  overall_accuracy: number;
  n_results: number;
  est_cost_usd: string;
  submitted_at: string;
}

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`API error ${status}`);
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Api {
  listSolvers(): Promise<SolverInfo[]>;
  check(body: Record<string, unknown>): Promise<{ state?: CheckStateView; job_id?: string }>;
  getJob(jobId: string): Promise<JobView>;
  downloadQuestions(): Promise<Record<string, unknown>[]>;
  downloadClaims(): Promise<Record<string, unknown>[]>;
  submitLlmEval(body: Record<string, unknown>): Promise<{ job_id: string }>;
  submitCheckerEval(body: Record<string, unknown>): Promise<{ job_id: string }>;
  llmLeaderboard(): Promise<LlmLeaderboardEntry[]>;
  checkerLeaderboard(): Promise<CheckerLeaderboardEntry[]>;
}

async function parseOrThrow(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, (body as any).detail ?? body);
  }
  return body;
}

export function createApi(baseUrl: string, fetchFn?: FetchLike): Api {
  const doFetch: FetchLike = fetchFn ?? ((url, init) => fetch(url, init));
  const get = async (path: string) => parseOrThrow(await doFetch(`${baseUrl}${path}`));
  const post = async (path: string, body: unknown) =>
    parseOrThrow(
      await doFetch(`${baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );

  return {
    async listSolvers() {
      return (await get("/v1/solvers")).solvers as SolverInfo[];
    },
    async check(body) {
      return post("/v1/check", body);
    },
    async getJob(jobId) {
      return (await get(`/v1/jobs/${jobId}`)).job as JobView;
    },
    async downloadQuestions() {
      return (await get("/v1/llm-eval/questions")).questions;
    },
    async downloadClaims() {
      return (await get("/v1/checker-eval/claims")).items;
    },
    async submitLlmEval(body) {
      return post("/v1/llm-eval/submissions", body);
    },
    async submitCheckerEval(body) {
      return post("/v1/checker-eval/submissions", body);
    },
    async llmLeaderboard() {
      return (await get("/v1/llm-eval/leaderboard")).entries as LlmLeaderboardEntry[];
    },
    async checkerLeaderboard() {
      return (await get("/v1/checker-eval/leaderboard")).entries as CheckerLeaderboardEntry[];
    },
  };
}

export function apiBaseUrl(): string {
  const fromStorage =
    typeof localStorage !== "undefined" ? localStorage.getItem("ofc-api-base") : null;
  return fromStorage ?? "";
}
