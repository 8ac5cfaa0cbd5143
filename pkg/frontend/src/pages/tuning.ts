/** Bandwidth-selection page: submit the job, poll, render power curves. */

import type { ApiClient } from '../api';
import type { FormDefaults } from '../defaults';
import { jsonArtifact, type DownloadArtifact } from '../download';
import { awaitJob } from '../jobs';
import { groupPowerCurve, powerCurveSvg } from '../plots';
import { withRetry } from '../retry';
import type { SelectHResult } from '../types';
import { PageBase, parseNumberList } from './common';

export class TuningPage extends PageBase {
  form: {
    labelsCol: number | null;
    datasetIdY: string | null;
    alternative: string;
    hGridText: string;
    nRep: number;
    seed: number;
  };
  jobId: string | null = null;
  jobState: string | null = null;
  result: SelectHResult | null = null;
  private rawResult: string | null = null;

  constructor(
    private readonly api: ApiClient,
    defaults: FormDefaults,
    private readonly pollIntervalMs = 1000,
  ) {
    super();
    this.form = {
      labelsCol: null,
      datasetIdY: null,
      alternative: (defaults.alternative as string) ?? 'location',
      hGridText: ((defaults.h_grid as number[]) ?? [0.6, 1.0, 1.4, 1.8, 2.2]).join(','),
      nRep: (defaults.n_rep as number) ?? 50,
      seed: (defaults.seed as number) ?? 0,
    };
  }

  async submit(datasetId: string): Promise<void> {
    this.begin();
    this.result = null;
    this.rawResult = null;
    this.jobId = null;
    this.jobState = null;
    try {
      const submitResp = await withRetry(() =>
        this.api.submitSelectH({
          dataset_id: datasetId,
          dataset_id_y: this.form.datasetIdY,
          labels_col: this.form.labelsCol,
          alternative: this.form.alternative,
          h_grid: parseNumberList(this.form.hGridText),
          n_rep: this.form.nRep,
          seed: this.form.seed,
        }),
      );
      this.jobId = submitResp.value.job_id;
      this.jobState = submitResp.value.status;
      this.result = await awaitJob<SelectHResult>(
        this.api,
        this.jobId,
        this.pollIntervalMs,
        (state) => {
          this.jobState = state.status;
        },
      );
      // re-fetch once so the stored raw text is the exact terminal body
      const finalResp = await this.api.jobStatus<SelectHResult>(this.jobId);
      this.rawResult = finalResp.rawText;
      this.succeed();
    } catch (err) {
      this.fail(err);
    }
  }

  async cancel(): Promise<void> {
    if (this.jobId) await this.api.cancelJob(this.jobId);
  }

  get selectedH(): number | null {
    return this.result?.h_selected ?? null;
  }

  powerPlotSvg(): string | null {
    if (!this.result) return null;
    return powerCurveSvg(this.result.power_curve);
  }

  /** Curve rows grouped per delta for the table view. */
  curveByDelta(): { delta: number; rows: { h: number; power: number }[] }[] {
    if (!this.result) return [];
    return [...groupPowerCurve(this.result.power_curve).entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([delta, rows]) => ({
        delta,
        rows: rows.map((r) => ({ h: r.h, power: r.power })),
      }));
  }

  download(): DownloadArtifact | null {
    return this.rawResult === null ? null : jsonArtifact('select_h_result.json', this.rawResult);
  }
}
