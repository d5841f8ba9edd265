// Pure view logic: chain composition state, client-side table sorting, and
// HTML rendering from API payloads. Nothing here computes a metric or a
// verdict; every displayed figure is read off a payload field.

import type {
  CheckStateView,
  CheckerLeaderboardEntry,
  JobView,
  LlmLeaderboardEntry,
  SolverInfo,
} from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

// ---- pipeline builder ---------------------------------------------------------

export interface ChainSelection {
  claim_processor: string | null;
  retriever: string | null;
  verifier: string | null;
  text: string;
}

export function solversOfKind(solvers: SolverInfo[], kind: string): SolverInfo[] {
  return solvers.filter((s) => s.kind === kind);
}

export function canSubmit(selection: ChainSelection): boolean {
  return Boolean(
    selection.claim_processor &&
      selection.retriever &&
      selection.verifier &&
      selection.text.trim(),
  );
}

// The three dropdowns are each filtered to one solver role, so a complete
// selection always wires document -> claims -> evidence -> verdicts.
export function buildInlineConfig(selection: ChainSelection): Record<string, unknown> {
  return {
    pipeline_id: "webui",
    solvers: [
      {
        name: "process",
        kind: "claim_processor",
        implementation: selection.claim_processor,
        input_name: "document",
        output_name: "claims",
      },
      {
        name: "retrieve",
        kind: "retriever",
        implementation: selection.retriever,
        input_name: "claims",
        output_name: "evidence",
      },
      {
        name: "verify",
        kind: "verifier",
        implementation: selection.verifier,
        input_name: "evidence",
        output_name: "verdicts",
      },
    ],
  };
}

export function renderSolverOptions(solvers: SolverInfo[], selected: string | null): string {
  const options = solvers
    .map(
      (s) =>
        `<option value="${escapeHtml(s.key)}"${s.key === selected ? " selected" : ""}>` +
        `${escapeHtml(s.key)}</option>`,
    )
    .join("");
  return `<option value=""${selected ? "" : " selected"}>choose...</option>${options}`;
}

export function renderCheckResult(state: CheckStateView): string {
  const verdict = state.document_verdict;
  const rows = state.claims
    .map((claim) => {
      const v = state.verdicts[claim.id];
      const label = v ? v.label : "(unverified)";
      const evidence = (state.evidence[claim.id] ?? [])
        .map(
          (ev) =>
            `<li>#${ev.rank} <span class="source">${escapeHtml(ev.source)}</span> ` +
            `${escapeHtml(ev.text)}</li>`,
        )
        .join("");
      return (
        `<tr class="claim-row"><td class="label label-${label}">${escapeHtml(label)}</td>` +
        `<td>${escapeHtml(claim.text)}` +
        (evidence ? `<ul class="evidence">${evidence}</ul>` : "") +
        `</td></tr>`
      );
    })
    .join("");
  const trace = (state.trace ?? [])
    .map(
      (t) =>
        `<li>${escapeHtml(t.solver_name)}: ${t.succeeded ? "ok" : "failed"}, ` +
        `${t.duration_ms} ms, ${t.tokens_in}/${t.tokens_out} tokens, ` +
        `${t.searches} searches, $${escapeHtml(t.cost_usd)}` +
        (t.note ? ` — ${escapeHtml(t.note)}` : "") +
        `</li>`,
    )
    .join("");
  return (
    `<div class="check-result">` +
    `<p class="document-verdict">Document verdict: <strong>${escapeHtml(
      verdict ? verdict.label : "(none)",
    )}</strong></p>` +
    `<table class="claims"><thead><tr><th>label</th><th>claim and evidence</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    (trace ? `<h3>Trace</h3><ul class="trace">${trace}</ul>` : "") +
    (state.total_cost_usd !== undefined
      ? `<p class="cost">Total cost: $${escapeHtml(state.total_cost_usd)}</p>`
      : "") +
    `</div>`
  );
}

export function renderChainError(detail: unknown): string {
  const info = detail as { type?: string; message?: string };
  const label = info && info.type ? info.type : "ChainError";
  const message = info && info.message ? info.message : String(detail);
  return `<div class="error inline-error"><strong>${escapeHtml(label)}</strong>: ${escapeHtml(
    message,
  )}</div>`;
}

export function renderValidationErrors(detail: unknown): string {
  const items = Array.isArray(detail) ? detail : [String(detail)];
  return (
    `<div class="error validation-errors"><strong>Validation failed</strong><ul>` +
    items.map((d) => `<li>${escapeHtml(String(d))}</li>`).join("") +
    `</ul></div>`
  );
}

// ---- jobs ------------------------------------------------------------------------

export function renderJob(job: JobView): string {
  const artifacts =
    job.status === "done" && job.result && (job.result as any).artifacts
      ? Object.entries((job.result as any).artifacts as Record<string, string>)
          .map(([name, path]) => `<li>${escapeHtml(name)}: <code>${escapeHtml(path)}</code></li>`)
          .join("")
      : "";
  return (
    `<div class="job status-${job.status}">` +
    `<p>Job <code>${escapeHtml(job.job_id)}</code>: <strong>${escapeHtml(job.status)}</strong></p>` +
    (job.error ? `<p class="error">${escapeHtml(job.error)}</p>` : "") +
    (artifacts ? `<p>Report artifacts:</p><ul class="artifacts">${artifacts}</ul>` : "") +
    `</div>`
  );
}

// ---- leaderboards -----------------------------------------------------------------

export type CheckerSortKey = "macro_f1" | "total_cost_usd" | "total_latency_s";
export type SortDirection = "asc" | "desc";

export function sortCheckerEntries(
  entries: CheckerLeaderboardEntry[],
  key: CheckerSortKey,
  direction: SortDirection,
): CheckerLeaderboardEntry[] {
  const value = (e: CheckerLeaderboardEntry) =>
    key === "macro_f1" ? e.metrics.macro_f1 : e[key];
  const sign = direction === "asc" ? 1 : -1;
  return [...entries].sort((a, b) => sign * (value(a) - value(b)));
}

export function toggleDirection(direction: SortDirection): SortDirection {
  return direction === "asc" ? "desc" : "asc";
}

export function renderCheckerLeaderboard(
  entries: CheckerLeaderboardEntry[],
  sortKey: CheckerSortKey,
  direction: SortDirection,
): string {
  if (entries.length === 0) {
    return `<p class="empty-state">No published checker submissions yet.</p>`;
  }
  const sorted = sortCheckerEntries(entries, sortKey, direction);
  const arrow = direction === "asc" ? "↑" : "↓";
  const header = (key: CheckerSortKey, label: string) =>
    `<th class="sortable" data-sort="${key}">${label}${sortKey === key ? " " + arrow : ""}</th>`;
  const rows = sorted
    .map(
      (e) =>
        `<tr><td>${e.rank}</td><td>${escapeHtml(e.system_name)} ` +
        `<span class="badge">${escapeHtml(e.self_reported_badge)}</span></td>` +
        `<td>${e.metrics.macro_f1}</td>` +
        `<td>${e.metrics.per_label.TRUE.f1}</td>` +
        `<td>${e.metrics.per_label.FALSE.f1}</td>` +
        `<td>${e.total_cost_usd}</td><td>${e.total_latency_s}</td></tr>`,
    )
    .join("");
  return (
    `<table class="leaderboard checker-board"><thead><tr>` +
    `<th>rank</th><th>system</th>` +
    header("macro_f1", "macro-F1") +
    `<th>F1 (TRUE)</th><th>F1 (FALSE)</th>` +
    header("total_cost_usd", "cost (USD)") +
    header("total_latency_s", "latency (s)") +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderLlmLeaderboard(entries: LlmLeaderboardEntry[]): string {
  if (entries.length === 0) {
    return `<p class="empty-state">No published LLM evaluations yet.</p>`;
  }
  const rows = entries
    .map(
      (e) =>
        `<tr><td>${e.rank}</td><td>${escapeHtml(e.model_name)}</td>` +
        `<td>${e.overall_accuracy}</td><td>${e.n_results}</td>` +
        `<td>$${escapeHtml(e.est_cost_usd)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="leaderboard llm-board"><thead><tr>` +
    `<th>rank</th><th>model</th><th>overall accuracy</th><th>items</th><th>est. cost</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}
