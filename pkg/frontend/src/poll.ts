// Job polling: fixed 2 s interval, capped attempts, injectable sleeper so
// tests run without real timers.

import type { Api, JobView } from "./api.js";

export interface PollOptions {
  intervalMs?: number;
  maxAttempts?: number;
  onUpdate?: (job: JobView) => void;
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollJob(api: Api, jobId: string, options: PollOptions = {}): Promise<JobView> {
  const intervalMs = options.intervalMs ?? 2000;
  const maxAttempts = options.maxAttempts ?? 150;
  const sleep = options.sleep ?? realSleep;
  let job = await api.getJob(jobId);
  options.onUpdate?.(job);
  let attempts = 1;
  while (job.status !== "done" && job.status !== "failed") {
    if (attempts >= maxAttempts) {
      throw new Error(`job ${jobId} still ${job.status} after ${attempts} polls`);
    }
    await sleep(intervalMs);
    job = await api.getJob(jobId);
    options.onUpdate?.(job);
    attempts += 1;
  }
  return job;
}
