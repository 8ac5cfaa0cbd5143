/** Polling for long-running jobs: one request per second until terminal. */

import type { ApiClient } from './api';
import type { JobStatus } from './types';

export const POLL_INTERVAL_MS = 1000;

const TERMINAL = new Set(['done', 'failed', 'cancelled']);

export function isTerminal(status: JobStatus<unknown>['status']): boolean {
  return TERMINAL.has(status);
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

/**
 * Yields each observed job state; stops after the first terminal state.
 * Repeated terminal observations would be idempotent for consumers, but
 * the generator never polls past the first one.
 */
export async function* pollJob<R>(
  api: ApiClient,
  jobId: string,
  intervalMs = POLL_INTERVAL_MS,
): AsyncGenerator<JobStatus<R>> {
  for (;;) {
    const { value } = await api.jobStatus<R>(jobId);
    yield value;
    if (isTerminal(value.status)) return;
    await sleep(intervalMs);
  }
}

/** Convenience wrapper: resolve with the result, reject on failure/cancel. */
export async function awaitJob<R>(
  api: ApiClient,
  jobId: string,
  intervalMs = POLL_INTERVAL_MS,
  onUpdate?: (state: JobStatus<R>) => void,
): Promise<R> {
  for await (const state of pollJob<R>(api, jobId, intervalMs)) {
    onUpdate?.(state);
    if (state.status === 'done') return state.result as R;
    if (state.status === 'failed') throw new Error(state.error ?? 'job failed');
    if (state.status === 'cancelled') throw new Error('job cancelled');
  }
  throw new Error('unreachable');
}
