/** Payload shapes of the v1 HTTP API. */

export interface UploadInfo {
  schema_version: number;
  dataset_id: string;
  n: number;
  d: number;
  columns: string[];
  column_summary: SummaryRecord[];
}

export interface SummaryRecord {
  variable: string;
  statistic: string;
  group: string;
  value: number | null;
}

export interface QQSeries {
  x: number[];
  y: number[];
  x_label: string;
  y_label: string;
}

export interface TestResult {
  schema_version: number;
  test_type: string;
  statistics: number[];
  critical_values: number[];
  reject: boolean[];
  h0_rejected: boolean;
  cv_method: string;
  h: number;
  quantile: number;
  b_replicates: number;
  details: Record<string, unknown>;
  summary_statistics: SummaryRecord[];
  qq_series: Record<string, QQSeries>;
}

export interface UniformityResult {
  schema_version: number;
  test_type: string;
  rho: number;
  un: number;
  tn_normalized: number;
  un_critical: number;
  reject_u: boolean;
  vn: number;
  vn_cutoff: number;
  reject_v: boolean;
  dof: number;
  c_constant: number;
  var_un: number;
  quantile: number;
  b_replicates: number;
  h0_rejected: boolean;
  summary_statistics: SummaryRecord[];
  qq_series: Record<string, QQSeries>;
}

export interface PowerCurveRow {
  h: number;
  delta: number;
  power: number;
  rejections: number;
  N: number;
}

export interface SelectHResult {
  schema_version: number;
  h_selected: number;
  delta_selected: number | null;
  power_at_selection: number | null;
  alternative: string;
  deltas: number[];
  power_curve: PowerCurveRow[];
}

export interface PkbdSampleResult {
  schema_version: number;
  method: string;
  n: number;
  rho: number;
  mu: number[];
  proposals_used: number;
  acceptance_rate: number;
  samples: number[][];
  plot: { kind: 'circle' | 'sphere'; coordinates: number[][] } | null;
}

export interface ClusterFitSummary {
  k: number;
  alpha: number[];
  mu: number[][];
  rho: number[];
  log_lik: number;
  wcss_euclidean: number;
  wcss_cosine: number;
  final_memberships: number[];
  igp: (number | null)[];
  ari?: number;
  macro_precision?: number;
  macro_recall?: number;
}

export interface ClusteringResult {
  schema_version: number;
  fit_id: string;
  k_values: number[];
  fits: Record<string, ClusterFitSummary>;
  elbow: { k: number; wcss_euclidean: number; wcss_cosine: number }[];
  sphere_coordinates: number[][];
  true_labels: number[] | null;
}

export interface JobStatus<R> {
  job_id: string;
  status: 'queued' | 'running' | 'done' | 'failed' | 'cancelled';
  result?: R;
  error?: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: unknown;
}
