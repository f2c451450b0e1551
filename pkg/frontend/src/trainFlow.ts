/**
 * The train-and-review flow: start a training job, poll its status (at
 * >= 1 s intervals), run classification, and load the predictions into
 * an uncertainty-first ReviewQueue. Corrections made during review are
 * posted as hand labels, so they enter the next training set.
 */

import type { ApiClient, PredictionRecord, TrainJob } from "./api.js";
import { ReviewQueue } from "./reviewQueue.js";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export async function runTraining(
  api: ApiClient,
  k: number,
  seed: number,
  pollMs = 1000,
): Promise<TrainJob> {
  const { job_id } = await api.startTraining(k, seed);
  for (;;) {
    const job = await api.getTrainJob(job_id);
    if (job.state !== "running") {
      if (job.state === "failed") {
        throw new Error(job.error ?? "training failed");
      }
      return job;
    }
    await sleep(pollMs);
  }
}

export async function loadReviewQueue(
  api: ApiClient,
  positivesOnly = false,
): Promise<ReviewQueue> {
  const records: PredictionRecord[] = [];
  const label = positivesOnly ? "particle" : undefined;
  for (let offset = 0; ; ) {
    const page = await api.getPredictions("margin_asc", label, offset, 200);
    records.push(...page.items);
    offset += page.items.length;
    if (offset >= page.total || page.items.length === 0) break;
  }
  return new ReviewQueue(records);
}

/** Post a correction for the record under review; returns the hand label. */
export async function correct(
  api: ApiClient,
  record: PredictionRecord,
  label: "particle" | "non_particle",
) {
  if (record.id === null) {
    throw new Error(`prediction for ${record.path} has no sample id`);
  }
  return api.postLabel(record.id, label);
}
