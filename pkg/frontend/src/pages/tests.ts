/**
 * Page models for the four synchronous test pages. Forms start from the
 * service's own schema defaults; results keep the raw response text so a
 * download is byte-identical to what the service sent.
 */

import type { ApiClient } from '../api';
import type { FormDefaults } from '../defaults';
import { jsonArtifact, type DownloadArtifact } from '../download';
import { qqPlotSvg } from '../plots';
import { withRetry } from '../retry';
import type { TestResult, UniformityResult } from '../types';
import { PageBase } from './common';

export interface PlanForm {
  method: string;
  B: number;
  b: number;
  quantile: number;
}

export function planFormFromDefaults(defaults: FormDefaults): PlanForm {
  return {
    method: (defaults.method as string) ?? 'subsampling',
    B: (defaults.B as number) ?? 150,
    b: (defaults.b as number) ?? 0.9,
    quantile: (defaults.quantile as number) ?? 0.95,
  };
}

abstract class TestPageBase<R extends TestResult | UniformityResult> extends PageBase {
  result: R | null = null;
  protected rawText: string | null = null;

  constructor(protected readonly api: ApiClient) {
    super();
  }

  protected async run(op: () => Promise<{ value: R; rawText: string }>): Promise<void> {
    this.begin();
    this.result = null;
    this.rawText = null;
    try {
      const resp = await withRetry(op);
      this.result = resp.value;
      this.rawText = resp.rawText;
      this.succeed();
    } catch (err) {
      this.fail(err);
    }
  }

  download(filename: string): DownloadArtifact | null {
    return this.rawText === null ? null : jsonArtifact(filename, this.rawText);
  }

  /** One SVG per variable, straight from the service's QQ series. */
  qqPlots(): { name: string; svg: string }[] {
    if (!this.result) return [];
    return Object.entries(this.result.qq_series).map(([name, series]) => ({
      name,
      svg: qqPlotSvg(name, series),
    }));
  }
}

export class NormalityPage extends TestPageBase<TestResult> {
  form: { h: number | null; B: number; quantile: number; centering: string; seed: number };

  constructor(api: ApiClient, defaults: FormDefaults) {
    super(api);
    this.form = {
      h: null,
      B: (defaults.B as number) ?? 150,
      quantile: (defaults.quantile as number) ?? 0.95,
      centering: (defaults.centering as string) ?? 'nonparam',
      seed: (defaults.seed as number) ?? 0,
    };
  }

  submit(datasetId: string): Promise<void> {
    if (this.form.h === null) throw new Error('bandwidth h is required');
    return this.run(() =>
      this.api.testNormality({
        dataset_id: datasetId,
        h: this.form.h as number,
        B: this.form.B,
        quantile: this.form.quantile,
        centering: this.form.centering,
        seed: this.form.seed,
      }),
    );
  }
}

export class TwoSamplePage extends TestPageBase<TestResult> {
  form: { h: number | null; plan: PlanForm; seed: number };

  constructor(api: ApiClient, defaults: FormDefaults, planDefaults: FormDefaults) {
    super(api);
    this.form = {
      h: null,
      plan: planFormFromDefaults(planDefaults),
      seed: (defaults.seed as number) ?? 0,
    };
  }

  submit(datasetId: string, datasetIdY: string): Promise<void> {
    if (this.form.h === null) throw new Error('bandwidth h is required');
    return this.run(() =>
      this.api.testTwoSample({
        dataset_id: datasetId,
        dataset_id_y: datasetIdY,
        h: this.form.h as number,
        plan: { ...this.form.plan },
        seed: this.form.seed,
      }),
    );
  }
}

export class KSamplePage extends TestPageBase<TestResult> {
  form: { labelsCol: number | null; h: number | null; plan: PlanForm; seed: number };

  constructor(api: ApiClient, defaults: FormDefaults, planDefaults: FormDefaults) {
    super(api);
    this.form = {
      labelsCol: null,
      h: null,
      plan: planFormFromDefaults(planDefaults),
      seed: (defaults.seed as number) ?? 0,
    };
  }

  submit(datasetId: string): Promise<void> {
    if (this.form.h === null || this.form.labelsCol === null) {
      throw new Error('bandwidth h and the label column are required');
    }
    return this.run(() =>
      this.api.testKSample({
        dataset_id: datasetId,
        labels_col: this.form.labelsCol as number,
        h: this.form.h as number,
        plan: { ...this.form.plan },
        seed: this.form.seed,
      }),
    );
  }

  /** Rows of the results table, one per reported statistic, verbatim. */
  resultRows(): { statistic: number; critical_value: number; reject: boolean }[] {
    if (!this.result) return [];
    return this.result.statistics.map((s, i) => ({
      statistic: s,
      critical_value: this.result!.critical_values[i],
      reject: this.result!.reject[i],
    }));
  }
}

export class UniformityPage extends TestPageBase<UniformityResult> {
  form: { rho: number | null; B: number; quantile: number; seed: number };

  constructor(api: ApiClient, defaults: FormDefaults) {
    super(api);
    this.form = {
      rho: null,
      B: (defaults.B as number) ?? 300,
      quantile: (defaults.quantile as number) ?? 0.95,
      seed: (defaults.seed as number) ?? 0,
    };
  }

  submit(datasetId: string): Promise<void> {
    if (this.form.rho === null) throw new Error('concentration rho is required');
    return this.run(() =>
      this.api.testUniformity({
        dataset_id: datasetId,
        rho: this.form.rho as number,
        B: this.form.B,
        quantile: this.form.quantile,
        seed: this.form.seed,
      }),
    );
  }
}
