/**
 * Chart option builders: histogram of permutation coherence with
 * proposed/mean markers, and NMSE line charts over SNR, snapshot count,
 * and path count. All return plain echarts option objects so tests can
 * inspect the numbers that will be drawn.
 */

import type { EChartsOption, SeriesOption } from "echarts";

import { DistRow, SchemaError, SweepRow } from "./schema.js";

export const HIST_BINS = 60;
export const HIST_RANGE: [number, number] = [0, 1];

export type FigureKind = "fig2" | "fig3" | "fig4" | "fig5";

export interface Histogram {
  centers: number[];
  counts: number[];
}

export function histogram(
  values: number[],
  bins = HIST_BINS,
  range: [number, number] = HIST_RANGE
): Histogram {
  const [lo, hi] = range;
  const width = (hi - lo) / bins;
  const counts = new Array<number>(bins).fill(0);
  for (const v of values) {
    if (v < lo || v > hi) {
      throw new SchemaError(`coherence value ${v} outside [${lo}, ${hi}]`);
    }
    const bin = Math.min(Math.floor((v - lo) / width), bins - 1);
    counts[bin] += 1;
  }
  const centers = counts.map((_, i) => lo + (i + 0.5) * width);
  return { centers, counts };
}

function distSummary(rows: DistRow[], mX: number, kind: string): number {
  const row = rows.find((r) => r.m_x === mX && r.kind === kind && r.draw === -1);
  if (row === undefined) {
    throw new SchemaError(`no ${kind} summary row for m_x=${mX}`);
  }
  return row.mu;
}

export function fig2Option(rows: DistRow[]): EChartsOption {
  const panels = [...new Set(rows.map((r) => r.m_x))].sort((a, b) => a - b);
  const series: SeriesOption[] = panels.map((mX) => {
    const samples = rows
      .filter((r) => r.m_x === mX && r.kind === "sample")
      .map((r) => r.mu);
    if (samples.length === 0) {
      throw new SchemaError(`no sample rows for m_x=${mX}`);
    }
    const hist = histogram(samples);
    return {
      type: "bar",
      name: `M_x=${mX}`,
      barWidth: "90%",
      data: hist.centers.map((c, i) => [c, hist.counts[i]]),
      markLine: {
        symbol: "none",
        data: [
          {
            name: "mean",
            xAxis: distSummary(rows, mX, "mean"),
            label: { formatter: "mean" },
          },
          {
            name: "proposed",
            xAxis: distSummary(rows, mX, "proposed"),
            label: { formatter: "proposed" },
            lineStyle: { type: "solid" },
          },
        ],
      },
    };
  });
  return {
    animation: false,
    title: { text: "Coherence of random orderings" },
    legend: { top: 24 },
    xAxis: { type: "value", name: "mutual coherence", min: 0, max: 1 },
    yAxis: { type: "value", name: "count" },
    series,
  };
}

function lineSeries(rows: SweepRow[], nameFor: (row: SweepRow) => string): SeriesOption[] {
  const groups = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const name = nameFor(row);
    const group = groups.get(name) ?? [];
    group.push(row);
    groups.set(name, group);
  }
  return [...groups.entries()].map(([name, group]) => ({
    type: "line",
    name,
    data: group
      .slice()
      .sort((a, b) => a.value - b.value)
      .map((r) => [r.value, r.nmse_db]),
  }));
}

function sweepOption(rows: SweepRow[], axis: string, xName: string, title: string): EChartsOption {
  const mismatched = rows.find((r) => r.axis !== axis);
  if (mismatched !== undefined) {
    throw new SchemaError(
      `expected axis ${axis}, found row with axis ${mismatched.axis}`
    );
  }
  const series =
    axis === "snr"
      ? lineSeries(rows, (r) => `${r.codebook} M=${r.m}`)
      : lineSeries(rows, (r) => r.codebook);
  return {
    animation: false,
    title: { text: title },
    legend: { top: 24 },
    xAxis: { type: "value", name: xName },
    yAxis: { type: "value", name: "NMSE (dB)" },
    series,
  };
}

export function fig3Option(rows: SweepRow[]): EChartsOption {
  return sweepOption(rows, "snr", "SNR (dB)", "NMSE vs SNR");
}

export function fig4Option(rows: SweepRow[]): EChartsOption {
  return sweepOption(rows, "m_x", "pilots per frame", "NMSE vs snapshot budget");
}

export function fig5Option(rows: SweepRow[]): EChartsOption {
  return sweepOption(rows, "n_p", "number of paths", "NMSE vs path count");
}
