import type { ApiClient } from "./api.js";
import type { Job } from "./types.js";

export class JobFailedError extends Error {
  constructor(public readonly job: Job) {
    super(job.error ?? `job ${job.job_id} failed`);
    this.name = "JobFailedError";
  }
}

export const POLL_INTERVAL_MS = 1000;

/** Poll a job once per second until it is done (resolve) or failed
 * (reject with the server's error message). */
export function pollJob(
  client: ApiClient,
  jobId: string,
  intervalMs: number = POLL_INTERVAL_MS,
  onTick?: (job: Job) => void,
): Promise<Job> {
  return new Promise((resolve, reject) => {
    const check = async () => {
      let job: Job;
      try {
        job = await client.getJob(jobId);
      } catch (err) {
        reject(err);
        return;
      }
      onTick?.(job);
      if (job.state === "done") {
        resolve(job);
      } else if (job.state === "failed") {
        reject(new JobFailedError(job));
      } else {
        setTimeout(check, intervalMs);
      }
    };
    void check();
  });
}
