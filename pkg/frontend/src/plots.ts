/**
 * Plot construction as pure data -> SVG-string functions.
 *
 * Numbers are taken verbatim from service payloads; this module only
 * maps them to screen coordinates.
 */

import type { PowerCurveRow, QQSeries } from './types';

export interface PlotBox {
  width: number;
  height: number;
  margin: number;
}

const DEFAULT_BOX: PlotBox = { width: 320, height: 280, margin: 36 };

function scale(values: number[], lo: number, hi: number): (v: number) => number {
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  return (v) => lo + ((v - min) / span) * (hi - lo);
}

function frame(box: PlotBox, title: string): string {
  return (
    `<rect x="${box.margin}" y="${box.margin / 2}" ` +
    `width="${box.width - 1.5 * box.margin}" height="${box.height - 1.5 * box.margin}" ` +
    `fill="none" stroke="#999"/>` +
    `<text x="${box.width / 2}" y="${box.margin / 2 - 6}" text-anchor="middle" ` +
    `class="plot-title">${title}</text>`
  );
}

export function qqPlotSvg(name: string, series: QQSeries, box: PlotBox = DEFAULT_BOX): string {
  const sx = scale(series.x, box.margin, box.width - box.margin / 2);
  const sy = scale(series.y, box.height - box.margin, box.margin / 2);
  const lo = Math.max(Math.min(...series.x), Math.min(...series.y));
  const hi = Math.min(Math.max(...series.x), Math.max(...series.y));
  const points = series.x
    .map((x, i) => `<circle cx="${sx(x).toFixed(1)}" cy="${sy(series.y[i]).toFixed(1)}" r="1.6"/>`)
    .join('');
  const diagonal =
    `<line x1="${sx(lo).toFixed(1)}" y1="${sy(lo).toFixed(1)}" ` +
    `x2="${sx(hi).toFixed(1)}" y2="${sy(hi).toFixed(1)}" stroke="#c44" stroke-dasharray="4 3"/>`;
  return (
    `<svg viewBox="0 0 ${box.width} ${box.height}" class="qq-plot" role="img" ` +
    `aria-label="QQ plot ${name}">` +
    frame(box, name) +
    diagonal +
    `<g fill="#2266aa">${points}</g>` +
    `</svg>`
  );
}

/** Rows grouped by delta, each an (h, power) polyline. */
export function groupPowerCurve(rows: PowerCurveRow[]): Map<number, PowerCurveRow[]> {
  const groups = new Map<number, PowerCurveRow[]>();
  for (const row of rows) {
    const bucket = groups.get(row.delta) ?? [];
    bucket.push(row);
    groups.set(row.delta, bucket);
  }
  for (const bucket of groups.values()) bucket.sort((a, b) => a.h - b.h);
  return groups;
}

const LINE_COLORS = ['#2266aa', '#cc6622', '#22aa66', '#aa2266', '#666622'];

export function powerCurveSvg(rows: PowerCurveRow[], box: PlotBox = DEFAULT_BOX): string {
  const groups = groupPowerCurve(rows);
  const hs = rows.map((r) => r.h);
  const sx = scale(hs, box.margin, box.width - box.margin / 2);
  const sy = (p: number) => box.height - box.margin - p * (box.height - 1.5 * box.margin);
  let body = '';
  let colorIdx = 0;
  for (const [delta, bucket] of [...groups.entries()].sort((a, b) => a[0] - b[0])) {
    const color = LINE_COLORS[colorIdx++ % LINE_COLORS.length];
    const path = bucket
      .map((r, i) => `${i === 0 ? 'M' : 'L'}${sx(r.h).toFixed(1)},${sy(r.power).toFixed(1)}`)
      .join(' ');
    body += `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`;
    body += bucket
      .map(
        (r) =>
          `<circle cx="${sx(r.h).toFixed(1)}" cy="${sy(r.power).toFixed(1)}" r="2.4" fill="${color}">` +
          `<title>delta=${r.delta} h=${r.h} power=${r.power}</title></circle>`,
      )
      .join('');
    body += `<text x="${box.width - box.margin / 2 + 2}" y="${sy(
      bucket[bucket.length - 1].power,
    ).toFixed(1)}" font-size="10" fill="${color}">d=${delta}</text>`;
  }
  const halfPower = `<line x1="${box.margin}" x2="${box.width - box.margin / 2}" y1="${sy(0.5).toFixed(
    1,
  )}" y2="${sy(0.5).toFixed(1)}" stroke="#888" stroke-dasharray="2 4"/>`;
  return (
    `<svg viewBox="0 0 ${box.width} ${box.height}" class="power-plot" role="img" ` +
    `aria-label="power versus bandwidth">` +
    frame(box, 'power vs h') +
    halfPower +
    body +
    `</svg>`
  );
}

export function elbowSvg(
  rows: { k: number; value: number }[],
  title: string,
  box: PlotBox = DEFAULT_BOX,
): string {
  const sorted = [...rows].sort((a, b) => a.k - b.k);
  const sx = scale(sorted.map((r) => r.k), box.margin, box.width - box.margin / 2);
  const sy = scale(sorted.map((r) => r.value), box.height - box.margin, box.margin / 2);
  const path = sorted
    .map((r, i) => `${i === 0 ? 'M' : 'L'}${sx(r.k).toFixed(1)},${sy(r.value).toFixed(1)}`)
    .join(' ');
  const dots = sorted
    .map(
      (r) =>
        `<circle cx="${sx(r.k).toFixed(1)}" cy="${sy(r.value).toFixed(1)}" r="2.6" fill="#2266aa">` +
        `<title>k=${r.k}: ${r.value}</title></circle>`,
    )
    .join('');
  return (
    `<svg viewBox="0 0 ${box.width} ${box.height}" class="elbow-plot" role="img" ` +
    `aria-label="${title}">` +
    frame(box, title) +
    `<path d="${path}" fill="none" stroke="#2266aa" stroke-width="1.5"/>` +
    dots +
    `</svg>`
  );
}

export function circleScatterSvg(points: number[][], box: PlotBox = DEFAULT_BOX): string {
  const cx = box.width / 2;
  const cy = box.height / 2;
  const r = Math.min(box.width, box.height) / 2 - box.margin;
  const dots = points
    .map(
      (p) =>
        `<circle cx="${(cx + p[0] * r).toFixed(1)}" cy="${(cy - p[1] * r).toFixed(1)}" ` +
        `r="1.6" fill="#2266aa" fill-opacity="0.6"/>`,
    )
    .join('');
  return (
    `<svg viewBox="0 0 ${box.width} ${box.height}" class="circle-plot" role="img" ` +
    `aria-label="samples on the unit circle">` +
    `<circle cx="${cx}" cy="${cy}" r="${r}" fill="none" stroke="#999"/>` +
    dots +
    `</svg>`
  );
}
