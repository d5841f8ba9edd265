import { describe, expect, it } from "vitest";

import { createApi } from "../src/api.js";
import { buildCheckerSubmission, buildLlmSubmission, parseJsonl } from "../src/submission.js";
import { stubServer } from "./stub.js";

const LLM_FILE = [
  '{"model_name": "demo-model"}',
  '{"question_id": "sb-prim-000", "response": "Yes."}',
  '{"question_id": "sa-ans-000", "response": "Seven."}',
].join("\n");

const CHECKER_FILE = [
  '{"system_name": "my-checker", "dataset_id": "factbench", "total_latency_s": 42.5, "total_cost_usd": 1.25}',
  '{"id": "ftqa-000#0", "label": "TRUE"}',
  '{"id": "ftqa-000#1", "label": "FALSE"}',
].join("\n");

describe("submission file parsing", () => {
  it("parses JSONL with a header row", () => {
    const rows = parseJsonl(LLM_FILE);
    expect(rows).toHaveLength(3);
    const body = buildLlmSubmission(rows, "sub-1", false);
    expect(body.model_name).toBe("demo-model");
    expect(body.responses).toHaveLength(2);
  });

  it("forwards the publish toggle", () => {
    const rows = parseJsonl(LLM_FILE);
    expect(buildLlmSubmission(rows, "s", true).publish).toBe(true);
    expect(buildLlmSubmission(rows, "s", false).publish).toBe(false);
    const checker = buildCheckerSubmission(parseJsonl(CHECKER_FILE), "s", "sys", true);
    expect(checker.publish).toBe(true);
  });

  it("carries self-reported cost and latency from the header", () => {
    const body = buildCheckerSubmission(parseJsonl(CHECKER_FILE), "s", "my-checker", false);
    expect(body.total_latency_s).toBe(42.5);
    expect(body.total_cost_usd).toBe(1.25);
    expect(body.predictions).toHaveLength(2);
  });

  it("tolerates a missing header for checker files", () => {
    const rows = parseJsonl('{"id": "x#0", "label": "TRUE"}');
    const body = buildCheckerSubmission(rows, "s", "sys", false);
    expect(body.predictions).toHaveLength(1);
    expect(body.dataset_id).toBe("factbench");
  });

  it("malformed lines raise", () => {
    expect(() => parseJsonl("{not json}")).toThrow();
  });

  it("publish flag reaches the wire", async () => {
    const stub = stubServer({
      "POST /v1/llm-eval/submissions": (body) => {
        expect((body as any).publish).toBe(true);
        return { status: 202, body: { schema_version: 1, job_id: "j9" } };
      },
    });
    const api = createApi("http://stub", stub.fetch);
    const body = buildLlmSubmission(parseJsonl(LLM_FILE), "sub-1", true);
    const accepted = await api.submitLlmEval({ ...body });
    expect(accepted.job_id).toBe("j9");
    expect((stub.exchanges[0].requestBody as any).publish).toBe(true);
  });
});
