/** Data-generation page for Poisson kernel-based densities. */

import type { ApiClient } from '../api';
import type { FormDefaults } from '../defaults';
import { jsonArtifact, type DownloadArtifact } from '../download';
import { circleScatterSvg } from '../plots';
import { withRetry } from '../retry';
import { sphereGeometry, type SphereGeometry } from '../sphere';
import type { PkbdSampleResult } from '../types';
import { PageBase, parseNumberList } from './common';

export const NO_PLOT_NOTICE =
  'visualization functionality is not supported for more than 3 dimensions';

export class PkbdPage extends PageBase {
  form: { n: number; rho: number | null; muText: string; method: string; seed: number };
  result: PkbdSampleResult | null = null;
  private rawText: string | null = null;

  constructor(private readonly api: ApiClient, defaults: FormDefaults) {
    super();
    this.form = {
      n: 1000,
      rho: null,
      muText: '0,0,1',
      method: (defaults.method as string) ?? 'rejacg',
      seed: (defaults.seed as number) ?? 0,
    };
  }

  async submit(): Promise<void> {
    if (this.form.rho === null) throw new Error('concentration rho is required');
    this.begin();
    this.result = null;
    this.rawText = null;
    try {
      const resp = await withRetry(() =>
        this.api.samplePkbd({
          n: this.form.n,
          rho: this.form.rho as number,
          mu: parseNumberList(this.form.muText),
          method: this.form.method,
          seed: this.form.seed,
        }),
      );
      this.result = resp.value;
      this.rawText = resp.rawText;
      this.succeed();
    } catch (err) {
      this.fail(err);
    }
  }

  /** What the plot area shows: a circle SVG, sphere geometry, or a notice. */
  plotView():
    | { kind: 'circle'; svg: string }
    | { kind: 'sphere'; geometry: SphereGeometry }
    | { kind: 'notice'; message: string }
    | null {
    if (!this.result) return null;
    if (this.result.plot === null) return { kind: 'notice', message: NO_PLOT_NOTICE };
    if (this.result.plot.kind === 'circle') {
      return { kind: 'circle', svg: circleScatterSvg(this.result.plot.coordinates) };
    }
    return { kind: 'sphere', geometry: sphereGeometry(this.result.plot.coordinates) };
  }

  download(): DownloadArtifact | null {
    return this.rawText === null ? null : jsonArtifact('pkbd_samples.json', this.rawText);
  }
}
