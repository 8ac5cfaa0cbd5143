/** Upload panel: delimiter choice, 20 MB guard, column preview. */

import type { ApiClient } from '../api';
import { withRetry } from '../retry';
import type { UploadInfo } from '../types';
import { PageBase } from './common';

export class UploadPanel extends PageBase {
  delimiter = ',';
  hasHeader = false;
  info: UploadInfo | null = null;

  constructor(private readonly api: ApiClient) {
    super();
  }

  get datasetId(): string | null {
    return this.info?.dataset_id ?? null;
  }

  /** Columns for the label-column selector (1-based, matching the API). */
  get columnChoices(): { index: number; name: string }[] {
    if (!this.info) return [];
    return this.info.columns.map((name, i) => ({ index: i + 1, name }));
  }

  async upload(name: string, content: Blob | string): Promise<UploadInfo | null> {
    this.begin();
    this.info = null;
    try {
      const resp = await withRetry(() =>
        this.api.uploadCsv(name, content, this.delimiter, this.hasHeader),
      );
      this.info = resp.value;
      this.succeed();
      return this.info;
    } catch (err) {
      this.fail(err);
      return null;
    }
  }
}
