/**
 * Clustering page: k-range job, collapsed per-k result cards, elbow
 * plots, side-by-side spheres (fitted membership vs true labels), and
 * the one-click k-sample test on the fitted clusters.
 */

import type { ApiClient } from '../api';
import type { FormDefaults } from '../defaults';
import { jsonArtifact, type DownloadArtifact } from '../download';
import { awaitJob } from '../jobs';
import { elbowSvg } from '../plots';
import { withRetry } from '../retry';
import { sphereGeometry, type SphereGeometry } from '../sphere';
import type { ClusterFitSummary, ClusteringResult, TestResult } from '../types';
import { PageBase, parseKRange } from './common';

export class ClusteringPage extends PageBase {
  form: {
    kRangeText: string;
    numInit: number;
    stoppingRule: string;
    trueLabelsCol: number | null;
    normalize: boolean;
    seed: number;
  };
  jobId: string | null = null;
  jobState: string | null = null;
  result: ClusteringResult | null = null;
  checkResult: (TestResult & { k: number }) | null = null;
  private rawResult: string | null = null;
  private rawCheck: string | null = null;
  private expanded = new Set<number>();

  constructor(
    private readonly api: ApiClient,
    defaults: FormDefaults,
    private readonly pollIntervalMs = 1000,
  ) {
    super();
    this.form = {
      kRangeText: '2..10',
      numInit: (defaults.num_init as number) ?? 10,
      stoppingRule: (defaults.stopping_rule as string) ?? 'loglik',
      trueLabelsCol: null,
      normalize: (defaults.normalize as boolean) ?? false,
      seed: (defaults.seed as number) ?? 0,
    };
  }

  async submit(datasetId: string): Promise<void> {
    this.begin();
    this.result = null;
    this.rawResult = null;
    this.checkResult = null;
    this.expanded.clear();
    try {
      const submitResp = await withRetry(() =>
        this.api.submitClustering({
          dataset_id: datasetId,
          k_values: parseKRange(this.form.kRangeText),
          num_init: this.form.numInit,
          stopping_rule: this.form.stoppingRule,
          true_labels_col: this.form.trueLabelsCol,
          normalize: this.form.normalize,
          seed: this.form.seed,
        }),
      );
      this.jobId = submitResp.value.job_id;
      this.jobState = submitResp.value.status;
      this.result = await awaitJob<ClusteringResult>(
        this.api,
        this.jobId,
        this.pollIntervalMs,
        (state) => {
          this.jobState = state.status;
        },
      );
      const finalResp = await this.api.jobStatus<ClusteringResult>(this.jobId);
      this.rawResult = finalResp.rawText;
      this.succeed();
    } catch (err) {
      this.fail(err);
    }
  }

  async cancel(): Promise<void> {
    if (this.jobId) await this.api.cancelJob(this.jobId);
  }

  /** Result cards start collapsed; clicking toggles one open. */
  cards(): { k: number; expanded: boolean; fit: ClusterFitSummary }[] {
    if (!this.result) return [];
    return Object.values(this.result.fits)
      .sort((a, b) => a.k - b.k)
      .map((fit) => ({ k: fit.k, expanded: this.expanded.has(fit.k), fit }));
  }

  toggleCard(k: number): void {
    if (this.expanded.has(k)) this.expanded.delete(k);
    else this.expanded.add(k);
  }

  elbowPlots(): { euclidean: string; cosine: string } | null {
    if (!this.result) return null;
    return {
      euclidean: elbowSvg(
        this.result.elbow.map((r) => ({ k: r.k, value: r.wcss_euclidean })),
        'WCSS (euclidean) vs k',
      ),
      cosine: elbowSvg(
        this.result.elbow.map((r) => ({ k: r.k, value: r.wcss_cosine })),
        'WCSS (cosine) vs k',
      ),
    };
  }

  /**
   * Sphere views for one k: fitted memberships always; the true-label
   * twin only when labels were provided (two adjacent subplots).
   */
  sphereViews(k: number): { fitted: SphereGeometry; truth: SphereGeometry | null } | null {
    if (!this.result) return null;
    const fit = this.result.fits[String(k)];
    if (!fit) return null;
    const coords = this.result.sphere_coordinates;
    return {
      fitted: sphereGeometry(coords, fit.final_memberships),
      truth: this.result.true_labels
        ? sphereGeometry(coords, this.result.true_labels)
        : null,
    };
  }

  /** Agreement metrics for a card, present only when labels were given. */
  metricsRows(k: number): { name: string; value: number }[] {
    const fit = this.result?.fits[String(k)];
    if (!fit || fit.ari === undefined) return [];
    return [
      { name: 'ARI', value: fit.ari },
      { name: 'Macro Precision', value: fit.macro_precision as number },
      { name: 'Macro Recall', value: fit.macro_recall as number },
    ];
  }

  async runKsampleCheck(k: number, h = 1.5, seed = 0): Promise<void> {
    if (!this.result) throw new Error('run the clustering first');
    const resp = await withRetry(() =>
      this.api.ksampleCheck({ fit_id: this.result!.fit_id, k, h, seed }),
    );
    this.checkResult = resp.value;
    this.rawCheck = resp.rawText;
  }

  download(): DownloadArtifact | null {
    return this.rawResult === null
      ? null
      : jsonArtifact('clustering_result.json', this.rawResult);
  }

  downloadCheck(): DownloadArtifact | null {
    return this.rawCheck === null
      ? null
      : jsonArtifact('ksample_check.json', this.rawCheck);
  }
}
