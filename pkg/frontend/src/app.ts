/**
 * Single-page shell: capability list in the left pane, one page model
 * per capability on the right. Every number shown comes verbatim from a
 * service payload; this file only lays out forms and results.
 */

import { ApiClient } from './api';
import { allModelDefaults, type FormDefaults } from './defaults';
import { checkboxInput, clear, fmt, h, numberInput, selectInput, svgContainer, textInput } from './dom';
import { triggerDownload } from './download';
import { ClusteringPage } from './pages/clustering';
import { PkbdPage } from './pages/pkbd';
import { KSamplePage, NormalityPage, TwoSamplePage, UniformityPage } from './pages/tests';
import { TuningPage } from './pages/tuning';
import { UploadPanel } from './pages/upload';
import { mountSphere } from './sphere';
import type { SummaryRecord, TestResult, UniformityResult } from './types';

const PAGES = [
  'Normality Test',
  'Two Sample Test',
  'K-Sample Test',
  'Tuning Parameter Selection',
  'Uniformity Test',
  'Data generation from PKBD Models',
  'Clustering on Sphere',
] as const;

type PageName = (typeof PAGES)[number];

function summaryTable(records: SummaryRecord[]): HTMLElement {
  const byVariable = new Map<string, SummaryRecord[]>();
  for (const rec of records) {
    const bucket = byVariable.get(rec.variable) ?? [];
    bucket.push(rec);
    byVariable.set(rec.variable, bucket);
  }
  const container = h('div', { class: 'summary-tables' });
  for (const [variable, recs] of byVariable) {
    const groups = [...new Set(recs.map((r) => r.group))];
    const stats = [...new Set(recs.map((r) => r.statistic))];
    const table = h('table', { class: 'summary' });
    table.append(
      h('tr', {}, h('th', {}, variable), ...groups.map((g) => h('th', {}, g))),
    );
    for (const stat of stats) {
      table.append(
        h(
          'tr',
          {},
          h('td', {}, stat),
          ...groups.map((g) => {
            const rec = recs.find((r) => r.group === g && r.statistic === stat);
            return h('td', {}, fmt(rec?.value));
          }),
        ),
      );
    }
    container.append(table);
  }
  return container;
}

function testResultTable(result: TestResult): HTMLElement {
  const table = h('table', { class: 'results' });
  table.append(
    h('tr', {}, h('th', {}, 'statistic'), h('th', {}, 'critical value'), h('th', {}, 'reject H0')),
  );
  result.statistics.forEach((stat, i) => {
    table.append(
      h(
        'tr',
        {},
        h('td', {}, fmt(stat)),
        h('td', {}, fmt(result.critical_values[i])),
        h('td', {}, fmt(result.reject[i])),
      ),
    );
  });
  return table;
}

function uniformityTable(result: UniformityResult): HTMLElement {
  const table = h('table', { class: 'results' });
  const rows: [string, string][] = [
    ['U statistic', fmt(result.un)],
    ['U critical value', fmt(result.un_critical)],
    ['U reject H0', fmt(result.reject_u)],
    ['V statistic', fmt(result.vn)],
    ['V cutoff', fmt(result.vn_cutoff)],
    ['V reject H0', fmt(result.reject_v)],
    ['DOF', fmt(result.dof)],
    ['c constant', fmt(result.c_constant)],
  ];
  for (const [name, value] of rows) {
    table.append(h('tr', {}, h('td', {}, name), h('td', {}, value)));
  }
  return table;
}

function errorBanner(message: string | null): HTMLElement {
  return message ? h('div', { class: 'error-banner' }, message) : h('span', {});
}

function uploadBlock(panel: UploadPanel, onReady: () => void): HTMLElement {
  const fileInput = h('input', { type: 'file' }) as HTMLInputElement;
  const status = h('span', { class: 'upload-status' });
  const block = h(
    'div',
    { class: 'upload-block' },
    selectInput('delimiter', [',', ';', 'tab', '|'], panel.delimiter, (v) => {
      panel.delimiter = v === 'tab' ? '\t' : v;
    }),
    checkboxInput('first row is a header', panel.hasHeader, (v) => (panel.hasHeader = v)),
    fileInput,
    status,
  );
  fileInput.addEventListener('change', async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    status.textContent = 'uploading…';
    const info = await panel.upload(file.name, file);
    if (info) {
      status.textContent = `${info.n} rows × ${info.d} columns`;
      onReady();
    } else {
      status.textContent = panel.error ?? 'upload failed';
    }
  });
  return block;
}

export class App {
  private readonly api: ApiClient;
  private defaults: Record<string, FormDefaults> = {};
  private main!: HTMLElement;

  constructor(private readonly root: HTMLElement, baseUrl = '') {
    this.api = new ApiClient(baseUrl);
  }

  async start(): Promise<void> {
    try {
      const spec = await this.api.openapi();
      this.defaults = allModelDefaults(spec.value);
    } catch {
      this.defaults = {};
    }
    const nav = h('nav', { class: 'left-pane' });
    this.main = h('main', { class: 'content' });
    for (const page of PAGES) {
      nav.append(
        h('button', { class: 'nav-item', onclick: () => this.show(page) }, page),
      );
    }
    this.root.append(nav, this.main);
    this.show('Normality Test');
  }

  private model(name: string): FormDefaults {
    return this.defaults[name] ?? {};
  }

  private show(page: PageName): void {
    clear(this.main);
    this.main.append(h('h2', {}, page));
    switch (page) {
      case 'Normality Test':
        return this.normalityPage();
      case 'Two Sample Test':
        return this.twoSamplePage();
      case 'K-Sample Test':
        return this.ksamplePage();
      case 'Tuning Parameter Selection':
        return this.tuningPage();
      case 'Uniformity Test':
        return this.uniformityPage();
      case 'Data generation from PKBD Models':
        return this.pkbdPage();
      case 'Clustering on Sphere':
        return this.clusteringPage();
    }
  }

  private resultSection(): HTMLElement {
    const section = h('section', { class: 'result' });
    this.main.append(section);
    return section;
  }

  private normalityPage(): void {
    const model = new NormalityPage(this.api, this.model('NormalityRequest'));
    const upload = new UploadPanel(this.api);
    const section = this.resultSection();
    const render = () => {
      clear(section);
      section.append(errorBanner(model.error ?? upload.error));
      if (!model.showResult || !model.result) return;
      section.append(testResultTable(model.result));
      section.append(summaryTable(model.result.summary_statistics));
      for (const { svg } of model.qqPlots()) section.append(svgContainer(svg));
      section.append(
        h('button', {
          onclick: () => {
            const artifact = model.download('normality_result.json');
            if (artifact) triggerDownload(artifact);
          },
        }, 'Download JSON'),
      );
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        uploadBlock(upload, () => undefined),
        numberInput('bandwidth h', model.form.h, (v) => (model.form.h = v)),
        numberInput('replicates B', model.form.B, (v) => (model.form.B = v ?? 150)),
        selectInput('centering', ['nonparam', 'param'], model.form.centering, (v) => {
          model.form.centering = v;
        }),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (upload.datasetId) {
              await model.submit(upload.datasetId);
              render();
            }
          },
        }, 'Run test'),
      ),
    );
  }

  private twoSamplePage(): void {
    const model = new TwoSamplePage(
      this.api,
      this.model('TwoSampleRequest'),
      this.model('PlanParams'),
    );
    const uploadX = new UploadPanel(this.api);
    const uploadY = new UploadPanel(this.api);
    const section = this.resultSection();
    const render = () => {
      clear(section);
      section.append(errorBanner(model.error ?? uploadX.error ?? uploadY.error));
      if (!model.showResult || !model.result) return;
      section.append(testResultTable(model.result));
      section.append(summaryTable(model.result.summary_statistics));
      for (const { svg } of model.qqPlots()) section.append(svgContainer(svg));
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        h('p', {}, 'sample 1'),
        uploadBlock(uploadX, () => undefined),
        h('p', {}, 'sample 2'),
        uploadBlock(uploadY, () => undefined),
        numberInput('bandwidth h', model.form.h, (v) => (model.form.h = v)),
        numberInput('replicates B', model.form.plan.B, (v) => (model.form.plan.B = v ?? 150)),
        selectInput(
          'method',
          ['subsampling', 'bootstrap', 'permutation'],
          model.form.plan.method,
          (v) => (model.form.plan.method = v),
        ),
        numberInput('subsample fraction b', model.form.plan.b, (v) => {
          model.form.plan.b = v ?? 0.9;
        }),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (uploadX.datasetId && uploadY.datasetId) {
              await model.submit(uploadX.datasetId, uploadY.datasetId);
              render();
            }
          },
        }, 'Run test'),
      ),
    );
  }

  private ksamplePage(): void {
    const model = new KSamplePage(
      this.api,
      this.model('KSampleRequest'),
      this.model('PlanParams'),
    );
    const upload = new UploadPanel(this.api);
    const section = this.resultSection();
    const labelField = h('div', { class: 'label-choice' });
    const render = () => {
      clear(section);
      section.append(errorBanner(model.error ?? upload.error));
      if (!model.showResult || !model.result) return;
      section.append(testResultTable(model.result));
      section.append(summaryTable(model.result.summary_statistics));
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        uploadBlock(upload, () => {
          clear(labelField);
          labelField.append(
            selectInput(
              'label column',
              upload.columnChoices.map((c) => `${c.index}: ${c.name}`),
              '',
              (v) => (model.form.labelsCol = Number(v.split(':')[0])),
            ),
          );
        }),
        labelField,
        numberInput('bandwidth h', model.form.h, (v) => (model.form.h = v)),
        numberInput('replicates B', model.form.plan.B, (v) => (model.form.plan.B = v ?? 150)),
        numberInput('subsample fraction b', model.form.plan.b, (v) => {
          model.form.plan.b = v ?? 0.9;
        }),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (upload.datasetId) {
              await model.submit(upload.datasetId);
              render();
            }
          },
        }, 'Run test'),
      ),
    );
  }

  private tuningPage(): void {
    const model = new TuningPage(this.api, this.model('SelectHRequest'));
    const upload = new UploadPanel(this.api);
    const status = h('p', { class: 'job-status' });
    const section = this.resultSection();
    const render = () => {
      clear(section);
      section.append(errorBanner(model.error ?? upload.error));
      status.textContent = model.jobState ? `job: ${model.jobState}` : '';
      if (!model.showResult || !model.result) return;
      section.append(
        h('p', {}, `selected h = ${fmt(model.selectedH)} ` +
          `(delta ${fmt(model.result.delta_selected)}, power ${fmt(model.result.power_at_selection)})`),
      );
      const svg = model.powerPlotSvg();
      if (svg) section.append(svgContainer(svg));
      section.append(
        h('button', {
          onclick: () => {
            const artifact = model.download();
            if (artifact) triggerDownload(artifact);
          },
        }, 'Download JSON'),
      );
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        uploadBlock(upload, () => undefined),
        numberInput('label column', model.form.labelsCol, (v) => (model.form.labelsCol = v), '1'),
        selectInput(
          'alternative',
          ['location', 'scale', 'skewness'],
          model.form.alternative,
          (v) => (model.form.alternative = v),
        ),
        textInput('h grid', model.form.hGridText, (v) => (model.form.hGridText = v)),
        numberInput('runs per cell N', model.form.nRep, (v) => (model.form.nRep = v ?? 50), '1'),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (upload.datasetId) {
              const done = model.submit(upload.datasetId);
              const tick = setInterval(render, 500);
              await done;
              clearInterval(tick);
              render();
            }
          },
        }, 'Select h'),
        h('button', { onclick: () => void model.cancel() }, 'Cancel job'),
        status,
      ),
    );
  }

  private uniformityPage(): void {
    const model = new UniformityPage(this.api, this.model('UniformityRequest'));
    const upload = new UploadPanel(this.api);
    const section = this.resultSection();
    const render = () => {
      clear(section);
      section.append(errorBanner(model.error ?? upload.error));
      if (!model.showResult || !model.result) return;
      section.append(uniformityTable(model.result));
      section.append(summaryTable(model.result.summary_statistics));
      for (const { svg } of model.qqPlots()) section.append(svgContainer(svg));
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        uploadBlock(upload, () => undefined),
        numberInput('concentration rho', model.form.rho, (v) => (model.form.rho = v)),
        numberInput('replicates B', model.form.B, (v) => (model.form.B = v ?? 300)),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (upload.datasetId) {
              await model.submit(upload.datasetId);
              render();
            }
          },
        }, 'Run test'),
      ),
    );
  }

  private pkbdPage(): void {
    const model = new PkbdPage(this.api, this.model('PkbdSampleRequest'));
    const section = this.resultSection();
    const render = async () => {
      clear(section);
      section.append(errorBanner(model.error));
      if (!model.showResult || !model.result) return;
      section.append(
        h('p', {}, `accepted ${model.result.n} of ${model.result.proposals_used} proposals ` +
          `(rate ${fmt(model.result.acceptance_rate)})`),
      );
      const plot = model.plotView();
      if (plot?.kind === 'circle') section.append(svgContainer(plot.svg));
      else if (plot?.kind === 'notice') section.append(h('p', { class: 'notice' }, plot.message));
      else if (plot?.kind === 'sphere') {
        const holder = h('div', { class: 'sphere-holder' });
        section.append(holder);
        await mountSphere(holder, plot.geometry);
      }
      section.append(
        h('button', {
          onclick: () => {
            const artifact = model.download();
            if (artifact) triggerDownload(artifact);
          },
        }, 'Download JSON'),
      );
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        numberInput('sample size n', model.form.n, (v) => (model.form.n = v ?? 1000), '1'),
        numberInput('concentration rho', model.form.rho, (v) => (model.form.rho = v)),
        textInput('mean direction mu', model.form.muText, (v) => (model.form.muText = v)),
        selectInput('method', ['rejacg', 'rejvmf'], model.form.method, (v) => {
          model.form.method = v;
        }),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            await model.submit();
            await render();
          },
        }, 'Generate'),
      ),
    );
  }

  private clusteringPage(): void {
    const model = new ClusteringPage(this.api, this.model('ClusteringRequest'));
    const upload = new UploadPanel(this.api);
    const status = h('p', { class: 'job-status' });
    const section = this.resultSection();
    const render = async () => {
      clear(section);
      section.append(errorBanner(model.error ?? upload.error));
      status.textContent = model.jobState ? `job: ${model.jobState}` : '';
      if (!model.showResult || !model.result) return;
      const elbow = model.elbowPlots();
      if (elbow) {
        section.append(svgContainer(elbow.euclidean), svgContainer(elbow.cosine));
      }
      for (const card of model.cards()) {
        const body = h('div', { class: 'card-body' });
        if (card.expanded) {
          body.append(h('p', {}, `log-likelihood ${fmt(card.fit.log_lik)}, ` +
            `WCSS cosine ${fmt(card.fit.wcss_cosine)}`));
          const metrics = model.metricsRows(card.k);
          if (metrics.length) {
            const table = h('table', { class: 'results' });
            for (const row of metrics) {
              table.append(h('tr', {}, h('td', {}, row.name), h('td', {}, fmt(row.value))));
            }
            body.append(table);
          }
          const spheres = model.sphereViews(card.k);
          if (spheres) {
            const pair = h('div', { class: 'sphere-pair' });
            const fittedHolder = h('div', { class: 'sphere-holder' });
            pair.append(fittedHolder);
            await mountSphere(fittedHolder, spheres.fitted);
            if (spheres.truth) {
              const truthHolder = h('div', { class: 'sphere-holder' });
              pair.append(truthHolder);
              await mountSphere(truthHolder, spheres.truth);
            }
            body.append(pair);
          }
          body.append(
            h('button', {
              onclick: async () => {
                await model.runKsampleCheck(card.k);
                await render();
              },
            }, 'K-sample test on clusters'),
          );
        }
        section.append(
          h(
            'div',
            { class: 'card' },
            h('button', {
              class: 'card-toggle',
              onclick: async () => {
                model.toggleCard(card.k);
                await render();
              },
            }, `k = ${card.k}`),
            body,
          ),
        );
      }
      if (model.checkResult) {
        section.append(
          h('h3', {}, `k-sample test on fitted clusters (k = ${model.checkResult.k})`),
          testResultTable(model.checkResult),
        );
      }
      section.append(
        h('button', {
          onclick: () => {
            const artifact = model.download();
            if (artifact) triggerDownload(artifact);
          },
        }, 'Download JSON'),
      );
    };
    this.main.prepend(
      h(
        'div',
        { class: 'form' },
        uploadBlock(upload, () => undefined),
        textInput('cluster counts k', model.form.kRangeText, (v) => (model.form.kRangeText = v)),
        numberInput('initializations', model.form.numInit, (v) => (model.form.numInit = v ?? 10), '1'),
        numberInput('true label column (optional)', model.form.trueLabelsCol, (v) => {
          model.form.trueLabelsCol = v;
        }, '1'),
        checkboxInput('L2-normalize rows', model.form.normalize, (v) => (model.form.normalize = v)),
        numberInput('seed', model.form.seed, (v) => (model.form.seed = v ?? 0)),
        h('button', {
          onclick: async () => {
            if (upload.datasetId) {
              const done = model.submit(upload.datasetId);
              const tick = setInterval(() => void render(), 500);
              await done;
              clearInterval(tick);
              await render();
            }
          },
        }, 'Run clustering'),
        h('button', { onclick: () => void model.cancel() }, 'Cancel job'),
        status,
      ),
    );
  }
}

export function boot(): void {
  const root = document.getElementById('app');
  if (root) void new App(root).start();
}
