/**
 * Typed client for the v1 API.
 *
 * Every response keeps its raw body text alongside the parsed value so
 * downloads can be byte-identical to what the service sent. The fetch
 * implementation is injectable for tests and non-browser runtimes.
 */

import type {
  ApiErrorBody,
  ClusteringResult,
  JobStatus,
  PkbdSampleResult,
  SelectHResult,
  TestResult,
  UniformityResult,
  UploadInfo,
} from './types';

export const MAX_UPLOAD_BYTES = 20 * 1024 * 1024;

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export class ClientSideError extends Error {}

export interface ApiResponse<T> {
  value: T;
  rawText: string;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async send<T>(path: string, init?: RequestInit): Promise<ApiResponse<T>> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const rawText = await resp.text();
    if (!resp.ok) {
      let body: ApiErrorBody;
      try {
        body = JSON.parse(rawText) as ApiErrorBody;
      } catch {
        body = { code: 'http_error', message: rawText || `HTTP ${resp.status}`, detail: null };
      }
      throw new ApiError(resp.status, body);
    }
    return { value: JSON.parse(rawText) as T, rawText };
  }

  private postJson<T>(path: string, payload: unknown): Promise<ApiResponse<T>> {
    return this.send<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  /** Upload a CSV; files over the 20 MB limit are rejected before any bytes leave the client. */
  async uploadCsv(
    name: string,
    content: Blob | string,
    delimiter = ',',
    hasHeader = false,
  ): Promise<ApiResponse<UploadInfo>> {
    const blob = typeof content === 'string' ? new Blob([content]) : content;
    if (blob.size > MAX_UPLOAD_BYTES) {
      throw new ClientSideError(
        `file is ${(blob.size / 1024 / 1024).toFixed(1)} MB; the limit is 20 MB`,
      );
    }
    const form = new FormData();
    form.append('file', blob, name);
    form.append('delimiter', delimiter);
    form.append('has_header', String(hasHeader));
    return this.send<UploadInfo>('/v1/data', { method: 'POST', body: form });
  }

  testNormality(req: {
    dataset_id: string;
    h: number;
    B?: number;
    quantile?: number;
    centering?: string;
    mu_hat?: number[] | null;
    sigma_hat?: number[][] | null;
    seed?: number;
  }): Promise<ApiResponse<TestResult>> {
    return this.postJson('/v1/tests/normality', req);
  }

  testTwoSample(req: {
    dataset_id: string;
    dataset_id_y: string;
    h: number;
    plan?: Record<string, unknown>;
    seed?: number;
  }): Promise<ApiResponse<TestResult>> {
    return this.postJson('/v1/tests/twosample', req);
  }

  testKSample(req: {
    dataset_id: string;
    labels_col: number;
    h: number;
    plan?: Record<string, unknown>;
    seed?: number;
  }): Promise<ApiResponse<TestResult>> {
    return this.postJson('/v1/tests/ksample', req);
  }

  testUniformity(req: {
    dataset_id: string;
    rho: number;
    B?: number;
    quantile?: number;
    seed?: number;
  }): Promise<ApiResponse<UniformityResult>> {
    return this.postJson('/v1/tests/uniformity', req);
  }

  submitSelectH(req: {
    dataset_id: string;
    dataset_id_y?: string | null;
    labels_col?: number | null;
    alternative?: string;
    deltas?: number[] | null;
    h_grid?: number[];
    n_rep?: number;
    plan?: Record<string, unknown>;
    seed?: number;
  }): Promise<ApiResponse<JobStatus<SelectHResult>>> {
    return this.postJson('/v1/tuning/select-h', req);
  }

  samplePkbd(req: {
    n: number;
    rho: number;
    mu: number[];
    method?: string;
    seed?: number;
  }): Promise<ApiResponse<PkbdSampleResult>> {
    return this.postJson('/v1/pkbd/sample', req);
  }

  submitClustering(req: {
    dataset_id: string;
    k_values: number[];
    num_init?: number;
    max_iter?: number;
    stopping_rule?: string;
    true_labels_col?: number | null;
    normalize?: boolean;
    seed?: number;
  }): Promise<ApiResponse<JobStatus<ClusteringResult>>> {
    return this.postJson('/v1/clustering/run', req);
  }

  ksampleCheck(req: {
    fit_id: string;
    k: number;
    h?: number;
    plan?: Record<string, unknown>;
    seed?: number;
  }): Promise<ApiResponse<TestResult & { k: number }>> {
    return this.postJson('/v1/clustering/ksample-check', req);
  }

  jobStatus<R>(jobId: string): Promise<ApiResponse<JobStatus<R>>> {
    return this.send(`/v1/jobs/${jobId}`);
  }

  cancelJob(jobId: string): Promise<ApiResponse<{ job_id: string; status: string }>> {
    return this.send(`/v1/jobs/${jobId}/cancel`, { method: 'POST' });
  }

  openapi(): Promise<ApiResponse<Record<string, unknown>>> {
    return this.send('/v1/openapi.json');
  }
}
