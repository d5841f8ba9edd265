// DOM wiring for the four pages: customized checker, LLM evaluation,
// checker evaluation, leaderboards. All logic that matters lives in the
// pure modules (api.ts, views.ts, poll.ts); this file only mounts them.

import { ApiError, apiBaseUrl, createApi, type Api, type SolverInfo } from "./api.js";
import { pollJob } from "./poll.js";
import { buildCheckerSubmission, buildLlmSubmission, parseJsonl } from "./submission.js";
import {
  buildInlineConfig,
  canSubmit,
  type ChainSelection,
  type CheckerSortKey,
  renderChainError,
  renderCheckerLeaderboard,
  renderCheckResult,
  renderJob,
  renderLlmLeaderboard,
  renderSolverOptions,
  renderValidationErrors,
  solversOfKind,
  type SortDirection,
  toggleDirection,
} from "./views.js";

const ROUTES = ["checker", "llm-eval", "checker-eval", "leaderboard"] as const;
type Route = (typeof ROUTES)[number];

function currentRoute(): Route {
  const hash = location.hash.replace(/^#\/?/, "");
  return (ROUTES as readonly string[]).includes(hash) ? (hash as Route) : "checker";
}

function el<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

// ---- checker page -------------------------------------------------------------

async function mountCheckerPage(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `
    <h2>Customized fact-checking</h2>
    <form id="chain-form">
      <label>Claim processor <select id="sel-processor"></select></label>
      <label>Retriever <select id="sel-retriever"></select></label>
      <label>Verifier <select id="sel-verifier"></select></label>
      <label>Input text <textarea id="input-text" rows="5"></textarea></label>
      <button id="submit-check" type="submit" disabled>Check</button>
    </form>
    <div id="check-error"></div>
    <div id="check-result"></div>
  `;
  const solvers: SolverInfo[] = await api.listSolvers();
  const selection: ChainSelection = {
    claim_processor: null,
    retriever: null,
    verifier: null,
    text: "",
  };
  const selects: Array<[string, keyof ChainSelection, string]> = [
    ["#sel-processor", "claim_processor", "claim_processor"],
    ["#sel-retriever", "retriever", "retriever"],
    ["#sel-verifier", "verifier", "verifier"],
  ];
  for (const [selector, field, kind] of selects) {
    const select = el<HTMLSelectElement>(selector);
    select.innerHTML = renderSolverOptions(solversOfKind(solvers, kind), null);
    select.addEventListener("change", () => {
      (selection[field] as string | null) = select.value || null;
      refresh();
    });
  }
  const text = el<HTMLTextAreaElement>("#input-text");
  text.addEventListener("input", () => {
    selection.text = text.value;
    refresh();
  });
  const submit = el<HTMLButtonElement>("#submit-check");

  function refresh() {
    submit.disabled = !canSubmit(selection);
  }

  el<HTMLFormElement>("#chain-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    el("#check-error").innerHTML = "";
    el("#check-result").innerHTML = "<p>Checking...</p>";
    try {
      const body = await api.check({
        text: selection.text,
        inline_config: buildInlineConfig(selection),
        sync: true,
      });
      el("#check-result").innerHTML = renderCheckResult(body.state!);
    } catch (error) {
      el("#check-result").innerHTML = "";
      if (error instanceof ApiError && error.status === 400) {
        el("#check-error").innerHTML = renderChainError(error.detail);
      } else if (error instanceof ApiError) {
        el("#check-error").innerHTML = renderValidationErrors(error.detail);
      } else {
        el("#check-error").innerHTML = renderValidationErrors(String(error));
      }
    }
  });
}

// ---- upload pages ------------------------------------------------------------------

function readFileAsText(input: HTMLInputElement): Promise<string> {
  return new Promise((resolve, reject) => {
    const file = input.files?.[0];
    if (!file) {
      reject(new Error("choose a file first"));
      return;
    }
    const reader = new FileReader();
    reader.onload = () => resolve(String(reader.result));
    reader.onerror = () => reject(reader.error);
    reader.readAsText(file);
  });
}

async function mountLlmEvalPage(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `
    <h2>LLM factuality evaluation</h2>
    <p><button id="download-questions">Download question set</button></p>
    <form id="llm-form">
      <label>Submission id <input id="llm-sub-id" required></label>
      <label>Responses file (JSONL: header with model_name, then question_id/response rows)
        <input id="llm-file" type="file" accept=".jsonl,.json,.txt" required></label>
      <label><input id="llm-publish" type="checkbox"> Publish results to the leaderboard</label>
      <button type="submit">Upload and evaluate</button>
    </form>
    <div id="llm-error"></div>
    <div id="llm-job"></div>
  `;
  el("#download-questions").addEventListener("click", async () => {
    const questions = await api.downloadQuestions();
    const blob = new Blob([questions.map((q) => JSON.stringify(q)).join("\n")], {
      type: "application/jsonl",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "factqa.jsonl";
    link.click();
  });
  el<HTMLFormElement>("#llm-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    el("#llm-error").innerHTML = "";
    try {
      const rows = parseJsonl(await readFileAsText(el<HTMLInputElement>("#llm-file")));
      const body = await api.submitLlmEval({
        ...buildLlmSubmission(
          rows,
          el<HTMLInputElement>("#llm-sub-id").value,
          el<HTMLInputElement>("#llm-publish").checked,
        ),
      });
      await pollJob(api, body.job_id, {
        onUpdate: (job) => {
          el("#llm-job").innerHTML = renderJob(job);
        },
      });
    } catch (error) {
      if (error instanceof ApiError) {
        el("#llm-error").innerHTML = renderValidationErrors(error.detail);
      } else {
        el("#llm-error").innerHTML = renderValidationErrors(String(error));
      }
    }
  });
}

async function mountCheckerEvalPage(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `
    <h2>Fact-checker evaluation</h2>
    <p><button id="download-claims">Download claims to check</button></p>
    <form id="checker-form">
      <label>Submission id <input id="checker-sub-id" required></label>
      <label>System name <input id="checker-system" required></label>
      <label>Predictions file (JSONL: header, then id/label rows)
        <input id="checker-file" type="file" accept=".jsonl,.json,.txt" required></label>
      <label><input id="checker-publish" type="checkbox"> Publish results to the leaderboard</label>
      <button type="submit">Upload and evaluate</button>
    </form>
    <div id="checker-error"></div>
    <div id="checker-job"></div>
  `;
  el("#download-claims").addEventListener("click", async () => {
    const items = await api.downloadClaims();
    const blob = new Blob([items.map((i) => JSON.stringify(i)).join("\n")], {
      type: "application/jsonl",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "claims.jsonl";
    link.click();
  });
  el<HTMLFormElement>("#checker-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    el("#checker-error").innerHTML = "";
    try {
      const rows = parseJsonl(await readFileAsText(el<HTMLInputElement>("#checker-file")));
      const body = await api.submitCheckerEval({
        ...buildCheckerSubmission(
          rows,
          el<HTMLInputElement>("#checker-sub-id").value,
          el<HTMLInputElement>("#checker-system").value,
          el<HTMLInputElement>("#checker-publish").checked,
        ),
      });
      await pollJob(api, body.job_id, {
        onUpdate: (job) => {
          el("#checker-job").innerHTML = renderJob(job);
        },
      });
    } catch (error) {
      if (error instanceof ApiError) {
        el("#checker-error").innerHTML = renderValidationErrors(error.detail);
      } else {
        el("#checker-error").innerHTML = renderValidationErrors(String(error));
      }
    }
  });
}

// ---- leaderboard page -----------------------------------------------------------------

async function mountLeaderboardPage(api: Api, root: HTMLElement): Promise<void> {
  root.innerHTML = `
    <h2>Leaderboards</h2>
    <h3>Fact-checkers</h3>
    <div id="checker-board"></div>
    <h3>LLM factuality</h3>
    <div id="llm-board"></div>
  `;
  let sortKey: CheckerSortKey = "macro_f1";
  let direction: SortDirection = "desc";
  const [checkerEntries, llmEntries] = await Promise.all([
    api.checkerLeaderboard(),
    api.llmLeaderboard(),
  ]);

  function renderBoards() {
    el("#checker-board").innerHTML = renderCheckerLeaderboard(checkerEntries, sortKey, direction);
    el("#llm-board").innerHTML = renderLlmLeaderboard(llmEntries);
    for (const th of Array.from(document.querySelectorAll<HTMLElement>("th.sortable"))) {
      th.addEventListener("click", () => {
        const key = th.dataset.sort as CheckerSortKey;
        direction = key === sortKey ? toggleDirection(direction) : "desc";
        sortKey = key;
        renderBoards();
      });
    }
  }

  renderBoards();
}

// ---- router -----------------------------------------------------------------------------

export async function mount(): Promise<void> {
  const api = createApi(apiBaseUrl());
  const root = el<HTMLElement>("#app");
  const route = currentRoute();
  for (const link of Array.from(document.querySelectorAll<HTMLAnchorElement>("nav a"))) {
    link.classList.toggle("active", link.hash === `#/${route}`);
  }
  root.innerHTML = "";
  if (route === "checker") await mountCheckerPage(api, root);
  else if (route === "llm-eval") await mountLlmEvalPage(api, root);
  else if (route === "checker-eval") await mountCheckerEvalPage(api, root);
  else await mountLeaderboardPage(api, root);
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("app")) {
  window.addEventListener("hashchange", () => void mount());
  void mount();
}
