/** Exponential-backoff retry for transient network failures.
 *
 * Service-level errors (4xx/5xx with a structured body) are NOT retried;
 * they carry meaning and are surfaced inline. Only transport failures
 * (fetch rejections) back off and retry.
 */

import { ApiError, ClientSideError } from './api';

export interface RetryOptions {
  attempts?: number;
  baseDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export async function withRetry<T>(
  op: () => Promise<T>,
  { attempts = 3, baseDelayMs = 300, sleep = defaultSleep }: RetryOptions = {},
): Promise<T> {
  let lastError: unknown;
  for (let attempt = 0; attempt < attempts; attempt++) {
    try {
      return await op();
    } catch (err) {
      if (err instanceof ApiError || err instanceof ClientSideError) throw err;
      lastError = err;
      if (attempt < attempts - 1) await sleep(baseDelayMs * 2 ** attempt);
    }
  }
  throw lastError;
}
