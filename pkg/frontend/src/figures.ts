/**
 * Figure builders: each turns parsed CSV rows into one echarts option.
 *
 * Five kinds are supported:
 *  - time-memory        build seconds and table bytes against load
 *  - overhead-load-fpr  overhead factor, achieved load and FPR log-ratio
 *                       against k (zero reference line in the FPR panel)
 *  - throughput-speedup keys/second and speedup against thread count
 *  - achievable-load    fill-until-failure load against walk budget,
 *                       with a min/max band and threshold lines
 *  - walk-hist          evictions-per-insert distribution, log-scale y
 */

import type { EChartsOption, SeriesOption } from "echarts";

import { ExperimentRecord, WalkBin, groupBy, seriesKey } from "./schema.js";
import { loadThreshold, seriesColor } from "./thresholds.js";

export const FIGURE_KINDS = [
  "time-memory",
  "overhead-load-fpr",
  "throughput-speedup",
  "achievable-load",
  "walk-hist",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const LEGEND = { top: 4 } as const;

function sortedBy<T>(items: T[], value: (item: T) => number): T[] {
  return [...items].sort((a, b) => value(a) - value(b));
}

function requireRows<T>(rows: T[], kind: string): void {
  if (rows.length === 0) {
    throw new Error(`${kind}: no data rows to plot`);
  }
}

// ── time-memory ─────────────────────────────────────────────────────

export function timeMemoryFigure(records: ExperimentRecord[]): EChartsOption {
  requireRows(records, "time-memory");
  const groups = groupBy(records, (r) => seriesKey(r.variant, r.l));
  const series: SeriesOption[] = [];
  const thresholdLines: object[] = [[], []] as object[];
  for (const [key, rows] of groups) {
    const byLoad = sortedBy(rows, (r) => r.achieved_load);
    const color = seriesColor(key);
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: byLoad.map((r) => [r.achieved_load, r.wall_time_s]),
      color,
      symbolSize: 5,
    });
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 1,
      yAxisIndex: 1,
      data: byLoad.map((r) => [r.achieved_load, r.memory_bytes / 2 ** 20]),
      color,
      symbolSize: 5,
    });
    const threshold = loadThreshold(rows[0].variant, rows[0].l);
    for (const axis of [0, 1]) {
      series.push({
        name: key,
        type: "line",
        xAxisIndex: axis,
        yAxisIndex: axis,
        data: [],
        color,
        markLine: {
          silent: true,
          symbol: "none",
          lineStyle: { type: "dashed", color },
          data: [{ xAxis: threshold }],
        },
      });
    }
  }
  return {
    animation: false,
    legend: LEGEND,
    grid: [
      { left: "7%", right: "55%", top: 60, bottom: 45 },
      { left: "55%", right: "5%", top: 60, bottom: 45 },
    ],
    xAxis: [
      { gridIndex: 0, type: "value", name: "load", min: 0, max: 1 },
      { gridIndex: 1, type: "value", name: "load", min: 0, max: 1 },
    ],
    yAxis: [
      { gridIndex: 0, type: "value", name: "build time (s)" },
      { gridIndex: 1, type: "value", name: "memory (MiB)" },
    ],
    series,
  };
}

// ── overhead-load-fpr ───────────────────────────────────────────────

export function overheadLoadFprFigure(records: ExperimentRecord[]): EChartsOption {
  requireRows(records, "overhead-load-fpr");
  const groups = groupBy(records, (r) => seriesKey(r.variant, r.l));
  const series: SeriesOption[] = [];
  for (const [key, rows] of groups) {
    const byK = sortedBy(rows, (r) => r.k);
    const color = seriesColor(key);
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: byK.map((r) => [r.k, r.overhead_C]),
      color,
    });
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 1,
      yAxisIndex: 1,
      data: byK.map((r) => [r.k, r.achieved_load]),
      color,
    });
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 2,
      yAxisIndex: 2,
      data: byK.map((r) => [r.k, Math.log2(r.empirical_fpr * 2 ** r.k)]),
      color,
    });
  }
  // zero reference line: points below it beat their target FPR
  series.push({
    name: "target",
    type: "line",
    xAxisIndex: 2,
    yAxisIndex: 2,
    data: [],
    markLine: {
      silent: true,
      symbol: "none",
      lineStyle: { color: "#d62728", type: "solid", width: 1.5 },
      data: [{ yAxis: 0 }],
    },
  });
  return {
    animation: false,
    legend: LEGEND,
    grid: [
      { left: "6%", right: "69%", top: 60, bottom: 45 },
      { left: "38%", right: "37%", top: 60, bottom: 45 },
      { left: "70%", right: "5%", top: 60, bottom: 45 },
    ],
    xAxis: [0, 1, 2].map((i) => ({ gridIndex: i, type: "value" as const, name: "k", minInterval: 1 })),
    yAxis: [
      { gridIndex: 0, type: "value", name: "overhead factor C", min: 1 },
      { gridIndex: 1, type: "value", name: "achieved load" },
      { gridIndex: 2, type: "value", name: "log2(FPR / 2^-k)" },
    ],
    series,
  };
}

// ── throughput-speedup ──────────────────────────────────────────────

export function throughputSpeedupFigure(records: ExperimentRecord[]): EChartsOption {
  requireRows(records, "throughput-speedup");
  const rate = (r: ExperimentRecord) =>
    Number.isNaN(r.lookup_throughput) ? r.insert_throughput : r.lookup_throughput;
  const mode = (r: ExperimentRecord) => (Number.isNaN(r.lookup_throughput) ? "insert" : "lookup");
  const groups = groupBy(records, (r) => `${mode(r)} ${seriesKey(r.variant, r.l)}`);
  const series: SeriesOption[] = [];
  for (const [key, rows] of groups) {
    const byThreads = sortedBy(rows, (r) => r.threads);
    const base = byThreads[0];
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: byThreads.map((r) => [r.threads, rate(r) / 1e6]),
    });
    series.push({
      name: key,
      type: "line",
      xAxisIndex: 1,
      yAxisIndex: 1,
      data: byThreads.map((r) => [r.threads, rate(r) / rate(base)]),
    });
  }
  series.push({
    name: "linear",
    type: "line",
    xAxisIndex: 1,
    yAxisIndex: 1,
    lineStyle: { type: "dotted", color: "#999" },
    color: "#999",
    symbol: "none",
    data: sortedBy(records, (r) => r.threads).map((r) => [r.threads, r.threads]),
  });
  return {
    animation: false,
    legend: LEGEND,
    grid: [
      { left: "7%", right: "55%", top: 70, bottom: 45 },
      { left: "55%", right: "5%", top: 70, bottom: 45 },
    ],
    xAxis: [
      { gridIndex: 0, type: "value", name: "threads", minInterval: 1 },
      { gridIndex: 1, type: "value", name: "threads", minInterval: 1 },
    ],
    yAxis: [
      { gridIndex: 0, type: "value", name: "Mkeys/s" },
      { gridIndex: 1, type: "value", name: "speedup" },
    ],
    series,
  };
}

// ── achievable-load ─────────────────────────────────────────────────

export function achievableLoadFigure(records: ExperimentRecord[]): EChartsOption {
  requireRows(records, "achievable-load");
  const groups = groupBy(records, (r) => seriesKey(r.variant, r.l));
  const series: SeriesOption[] = [];
  for (const [key, rows] of groups) {
    const color = seriesColor(key);
    const byWalk = groupBy(rows, (r) => String(r.max_walk));
    const points = sortedBy(
      [...byWalk.entries()].map(([walk, runs]) => {
        const loads = runs.map((r) => r.achieved_load);
        return {
          walk: Number(walk),
          mean: loads.reduce((a, b) => a + b, 0) / loads.length,
          min: Math.min(...loads),
          max: Math.max(...loads),
        };
      }),
      (p) => p.walk
    );
    // min/max band: invisible base line plus stacked difference area
    series.push({
      name: key,
      type: "line",
      stack: `${key}-band`,
      data: points.map((p) => [p.walk, p.min]),
      lineStyle: { opacity: 0 },
      symbol: "none",
      color,
      tooltip: { show: false },
    });
    series.push({
      name: key,
      type: "line",
      stack: `${key}-band`,
      data: points.map((p) => [p.walk, p.max - p.min]),
      lineStyle: { opacity: 0 },
      symbol: "none",
      areaStyle: { color, opacity: 0.25 },
      color,
      tooltip: { show: false },
    });
    series.push({
      name: key,
      type: "line",
      data: points.map((p) => [p.walk, p.mean]),
      color,
    });
    series.push({
      name: key,
      type: "line",
      data: [],
      color,
      markLine: {
        silent: true,
        symbol: "none",
        lineStyle: { type: "dashed", color },
        data: [{ yAxis: loadThreshold(rows[0].variant, rows[0].l) }],
      },
    });
  }
  return {
    animation: false,
    legend: LEGEND,
    grid: { left: "10%", right: "5%", top: 60, bottom: 50 },
    xAxis: { type: "log", name: "walk budget", logBase: 10 },
    yAxis: { type: "value", name: "achieved load", min: 0, max: 1 },
    series,
  };
}

// ── walk-hist ───────────────────────────────────────────────────────

export function walkHistFigure(bins: WalkBin[]): EChartsOption {
  requireRows(bins, "walk-hist");
  const groups = groupBy(bins, (b) => seriesKey(b.variant, b.l));
  const series: SeriesOption[] = [];
  for (const [key, rows] of groups) {
    const byLen = sortedBy(rows, (b) => b.walk_len);
    series.push({
      name: key,
      type: "line",
      // log axes reject exact zeros; clamp the x origin to 0.5 and keep counts >= 1
      data: byLen.filter((b) => b.count > 0).map((b) => [Math.max(b.walk_len, 0.5), b.count]),
      color: seriesColor(key),
      symbolSize: 4,
    });
  }
  return {
    animation: false,
    legend: LEGEND,
    grid: { left: "10%", right: "5%", top: 60, bottom: 50 },
    xAxis: { type: "log", name: "evictions per insert", logBase: 10 },
    yAxis: { type: "log", name: "inserts", logBase: 10 },
    series,
  };
}
