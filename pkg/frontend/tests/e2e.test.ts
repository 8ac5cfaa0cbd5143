/**
 * End-to-end tests against the real HTTP service.
 *
 * A uvicorn process is spawned for the suite; the page models talk to it
 * through plain fetch, exactly as the browser bundle would. (No headless
 * browser is available in this environment, so the DOM layer is covered
 * by the unit tests and this file drives the page models directly.)
 */

import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient, MAX_UPLOAD_BYTES } from '../src/api';
import { allModelDefaults, type FormDefaults } from '../src/defaults';
import { ClusteringPage } from '../src/pages/clustering';
import { KSamplePage } from '../src/pages/tests';
import { TuningPage } from '../src/pages/tuning';
import { UploadPanel } from '../src/pages/upload';

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, '..', '..');
const PORT = 18431;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let api: ApiClient;
let defaults: Record<string, FormDefaults>;

/** Deterministic standard normals (LCG + Box-Muller) for test data. */
function makeRng(seed: number): () => number {
  let state = BigInt(seed) & 0xffffffffffffffffn;
  const next = () => {
    state = (state * 6364136223846793005n + 1442695040888963407n) & 0xffffffffffffffffn;
    return Number(state >> 11n) / 2 ** 53;
  };
  return () => {
    const u1 = Math.max(next(), 1e-12);
    const u2 = next();
    return Math.sqrt(-2 * Math.log(u1)) * Math.cos(2 * Math.PI * u2);
  };
}

function gaussianGroupsCsv(): string {
  const rng = makeRng(97531);
  const shifts = [
    [0.0, 1.0],
    [-0.9, -0.4],
    [0.9, -0.4],
  ];
  const lines: string[] = [];
  shifts.forEach((shift, g) => {
    for (let i = 0; i < 40; i++) {
      lines.push(`${rng() + shift[0]},${rng() + shift[1]},${g + 1}`);
    }
  });
  return lines.join('\n') + '\n';
}

function sphericalClustersCsv(): string {
  const rng = makeRng(24680);
  const centers = [
    [1, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0],
  ];
  const lines: string[] = [];
  centers.forEach((center, g) => {
    for (let i = 0; i < 60; i++) {
      const point = center.map((c) => 4 * c + 0.6 * rng());
      lines.push([...point, g + 1].join(','));
    }
  });
  return lines.join('\n') + '\n';
}

/** The wireless data when a local copy exists, else the synthetic stand-in. */
function clusteringFixture(): { csv: string; labelCol: number; kRange: string } {
  const wireless = join(repoRoot, 'data', 'wifi_localization.txt');
  if (existsSync(wireless)) {
    const rows = readFileSync(wireless, 'utf8')
      .trim()
      .split(/\r?\n/)
      .map((line) => line.trim().split(/\s+/).join(','));
    return { csv: rows.join('\n') + '\n', labelCol: 8, kRange: '2..5' };
  }
  return { csv: sphericalClustersCsv(), labelCol: 8, kRange: '2..4' };
}

function runCli(args: string[], cwd: string): any {
  const proc = spawnSync('python3', ['-m', 'kbqd', ...args], {
    cwd,
    encoding: 'utf8',
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.status !== 0) throw new Error(`cli failed: ${proc.stderr}`);
  return JSON.parse(proc.stdout);
}

beforeAll(async () => {
  server = spawn(
    'python3',
    ['-m', 'uvicorn', 'kbqd.service:app', '--host', '127.0.0.1', '--port', String(PORT), '--log-level', 'warning'],
    { cwd: repoRoot, stdio: ['ignore', 'pipe', 'pipe'] },
  );
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/v1/openapi.json`);
      if (resp.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('service did not start');
    await new Promise((r) => setTimeout(r, 250));
  }
  api = new ApiClient(BASE);
  defaults = allModelDefaults((await api.openapi()).value as Record<string, any>);
});

afterAll(() => {
  server?.kill();
});

describe('interactive loop', () => {
  it('upload -> select-h -> power curve -> k-sample with selected h -> download', async () => {
    const csv = gaussianGroupsCsv();

    // fresh session: upload with an explicit delimiter
    const upload = new UploadPanel(api);
    upload.delimiter = ',';
    const info = await upload.upload('groups.csv', csv);
    expect(info).not.toBeNull();
    expect(info!.n).toBe(120);
    expect(info!.d).toBe(3);
    expect(upload.columnChoices.length).toBe(3);

    // run the bandwidth search as a polled job (fast grid to keep CI quick)
    const tuning = new TuningPage(api, defaults.SelectHRequest, 50);
    tuning.form.labelsCol = 3;
    tuning.form.hGridText = '0.6,1.2';
    tuning.form.nRep = 10;
    tuning.form.seed = 7;
    await tuning.submit(upload.datasetId!);
    expect(tuning.phase).toBe('done');
    expect(tuning.jobState).toBe('done');

    // read the power curve
    const curve = tuning.curveByDelta();
    expect(curve.length).toBeGreaterThan(0);
    expect(curve[0].rows.length).toBeGreaterThan(0);
    const selected = tuning.selectedH;
    expect(selected).not.toBeNull();
    expect([0.6, 1.2]).toContain(selected);

    // re-run the k-sample test with the selected bandwidth
    const ksample = new KSamplePage(api, defaults.KSampleRequest, defaults.PlanParams);
    ksample.form.h = selected!;
    ksample.form.labelsCol = 3;
    ksample.form.seed = 11;
    await ksample.submit(upload.datasetId!);
    expect(ksample.showResult).toBe(true);
    expect(ksample.result!.h).toBe(selected);
    expect(ksample.resultRows().length).toBe(2);

    // downloads are byte-identical to the service bodies
    const tuningArtifact = tuning.download();
    const ksampleArtifact = ksample.download('ksample_result.json');
    expect(tuningArtifact).not.toBeNull();
    expect(ksampleArtifact).not.toBeNull();
    const jobRaw = await fetch(`${BASE}/v1/jobs/${tuning.jobId}`).then((r) => r.text());
    expect(tuningArtifact!.bytes).toBe(jobRaw);
    expect(JSON.parse(ksampleArtifact!.bytes)).toEqual(ksample.result);
  }, 180_000);
});

describe('dashboard parity with the CLI', () => {
  it('k-sample page numbers equal the CLI JSON for identical parameters', async () => {
    const csv = gaussianGroupsCsv();
    const dir = mkdtempSync(join(tmpdir(), 'kbqd-parity-'));
    const csvPath = join(dir, 'groups.csv');
    writeFileSync(csvPath, csv);
    const cli = runCli(
      ['ksample-test', '--data', csvPath, '--labels-col', '3', '--h', '1.5', '--seed', '1234'],
      repoRoot,
    );

    const upload = new UploadPanel(api);
    await upload.upload('groups.csv', csv);
    const page = new KSamplePage(api, defaults.KSampleRequest, defaults.PlanParams);
    page.form.h = 1.5;
    page.form.labelsCol = 3;
    page.form.seed = 1234;
    await page.submit(upload.datasetId!);

    expect(page.result!.statistics).toEqual(cli.statistics);
    expect(page.result!.critical_values).toEqual(cli.critical_values);
    expect(page.result!.reject).toEqual(cli.reject);
    // the summary tables shown next to the result match too
    expect(page.result!.summary_statistics).toEqual(cli.summary_statistics);
  }, 120_000);

  it('clustering page numbers equal the CLI JSON for identical parameters', async () => {
    const fixture = clusteringFixture();
    const dir = mkdtempSync(join(tmpdir(), 'kbqd-parity-'));
    const csvPath = join(dir, 'clusters.csv');
    writeFileSync(csvPath, fixture.csv);
    const cli = runCli(
      ['cluster', '--data', csvPath, '--true-labels-col', String(fixture.labelCol),
       '--k', fixture.kRange, '--num-init', '3', '--normalize', '--seed', '31'],
      repoRoot,
    );

    const upload = new UploadPanel(api);
    await upload.upload('clusters.csv', fixture.csv);
    const page = new ClusteringPage(api, defaults.ClusteringRequest, 100);
    page.form.kRangeText = fixture.kRange;
    page.form.numInit = 3;
    page.form.trueLabelsCol = fixture.labelCol;
    page.form.normalize = true;
    page.form.seed = 31;
    await page.submit(upload.datasetId!);
    expect(page.phase).toBe('done');

    for (const card of page.cards()) {
      const cliFit = cli.fits[String(card.k)];
      expect(card.fit.log_lik).toBe(cliFit.log_lik);
      expect(card.fit.wcss_euclidean).toBe(cliFit.wcss_euclidean);
      expect(card.fit.wcss_cosine).toBe(cliFit.wcss_cosine);
      expect(card.fit.final_memberships).toEqual(cliFit.final_memberships);
      expect(card.fit.ari).toBe(cliFit.ari);
      expect(card.fit.macro_precision).toBe(cliFit.macro_precision);
      expect(card.fit.macro_recall).toBe(cliFit.macro_recall);
    }
    expect(page.result!.elbow.map((r) => r.wcss_cosine)).toEqual(
      cli.elbow.map((r: { wcss_cosine: number }) => r.wcss_cosine),
    );
  }, 300_000);

  it('oversized uploads are rejected on both sides', async () => {
    // client side: the guard fires before any bytes are sent
    const big = new Blob([new Uint8Array(25 * 1024 * 1024)]);
    await expect(api.uploadCsv('big.csv', big)).rejects.toThrow('20 MB');

    // server side: bypass the client guard with a raw multipart request
    const numberRow = '1.0,2.0\n';
    const repeated = numberRow.repeat(Math.ceil((MAX_UPLOAD_BYTES + 1024) / numberRow.length));
    const form = new FormData();
    form.append('file', new Blob([repeated]), 'big.csv');
    const resp = await fetch(`${BASE}/v1/data`, { method: 'POST', body: form });
    expect(resp.status).toBe(413);
    const body = await resp.json();
    expect(body.code).toBe('too_large');
  }, 120_000);
});
