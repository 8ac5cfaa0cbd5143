/** Shared page-model machinery. */

import { ApiError, ClientSideError } from '../api';

export type Phase = 'idle' | 'running' | 'done' | 'error';

export class PageBase {
  phase: Phase = 'idle';
  error: string | null = null;

  protected begin(): void {
    this.phase = 'running';
    this.error = null;
  }

  protected succeed(): void {
    this.phase = 'done';
  }

  protected fail(err: unknown): void {
    this.phase = 'error';
    if (err instanceof ApiError) {
      this.error = `${err.body.code}: ${err.body.message}`;
    } else if (err instanceof ClientSideError) {
      this.error = err.message;
    } else {
      this.error = err instanceof Error ? err.message : String(err);
    }
  }

  /** Result panels only exist after a successful service response. */
  get showResult(): boolean {
    return this.phase === 'done';
  }
}

export function parseNumberList(text: string): number[] {
  const values = text
    .split(',')
    .map((v) => v.trim())
    .filter((v) => v.length > 0)
    .map(Number);
  if (values.some((v) => Number.isNaN(v))) {
    throw new ClientSideError(`expected comma-separated numbers, got "${text}"`);
  }
  return values;
}

export function parseKRange(text: string): number[] {
  const trimmed = text.trim();
  const rangeMatch = /^(\d+)\.\.(\d+)$/.exec(trimmed);
  if (rangeMatch) {
    const lo = Number(rangeMatch[1]);
    const hi = Number(rangeMatch[2]);
    const out: number[] = [];
    for (let k = lo; k <= hi; k++) out.push(k);
    return out;
  }
  return parseNumberList(trimmed).map((v) => {
    if (!Number.isInteger(v)) throw new ClientSideError(`cluster counts must be integers: ${v}`);
    return v;
  });
}
