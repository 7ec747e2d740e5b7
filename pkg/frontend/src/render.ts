/**
 * Server-side rendering of figure options to SVG and PNG files, plus
 * directory-level discovery so a whole experiment output folder renders
 * in one call.
 */

import { readFileSync, writeFileSync, readdirSync } from "node:fs";
import { basename, join } from "node:path";

import * as echarts from "echarts";
import { Resvg } from "@resvg/resvg-js";
import type { EChartsOption } from "echarts";

import {
  FigureKind,
  achievableLoadFigure,
  overheadLoadFprFigure,
  throughputSpeedupFigure,
  timeMemoryFigure,
  walkHistFigure,
} from "./figures.js";
import { parseRecords, parseWalkBins } from "./schema.js";

export interface RenderResult {
  kind: FigureKind;
  svgPath: string;
  pngPath?: string;
}

export function buildOption(kind: FigureKind, csvText: string, source: string): EChartsOption {
  switch (kind) {
    case "time-memory":
      return timeMemoryFigure(parseRecords(csvText, source));
    case "overhead-load-fpr":
      return overheadLoadFprFigure(parseRecords(csvText, source));
    case "throughput-speedup":
      return throughputSpeedupFigure(parseRecords(csvText, source));
    case "achievable-load":
      return achievableLoadFigure(parseRecords(csvText, source));
    case "walk-hist":
      return walkHistFigure(parseWalkBins(csvText, source));
  }
}

/**
 * The SVG renderer names styles after a process-global instance counter
 * (zr<N>-cls-<M>), so the same figure rendered twice in one process
 * differs byte-wise.  Rewrite the tokens in first-appearance order to
 * make output deterministic.
 */
export function normalizeSvgClasses(svg: string): string {
  const families = new Map<string, Map<string, string>>();
  return svg.replace(/zr\d+-(cls-|c)(\d+)/g, (token, family: string) => {
    let mapping = families.get(family);
    if (!mapping) {
      mapping = new Map();
      families.set(family, mapping);
    }
    let stable = mapping.get(token);
    if (!stable) {
      stable = `zr0-${family}${mapping.size}`;
      mapping.set(token, stable);
    }
    return stable;
  });
}

export function optionToSvg(option: EChartsOption, width = 960, height = 420): string {
  const chart = echarts.init(null, null, { renderer: "svg", ssr: true, width, height });
  try {
    chart.setOption({ backgroundColor: "#ffffff", ...option });
    return normalizeSvgClasses(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

export function svgToPng(svg: string): Buffer {
  return new Resvg(svg, { fitTo: { mode: "zoom", value: 2 } }).render().asPng();
}

export interface RenderOptions {
  width?: number;
  height?: number;
  png?: boolean;
}

export function renderFigure(
  kind: FigureKind,
  inputPath: string,
  outBase: string,
  opts: RenderOptions = {}
): RenderResult {
  const csv = readFileSync(inputPath, "utf-8");
  const option = buildOption(kind, csv, inputPath);
  const svg = optionToSvg(option, opts.width ?? 960, opts.height ?? 420);
  const svgPath = `${outBase}.svg`;
  writeFileSync(svgPath, svg);
  const result: RenderResult = { kind, svgPath };
  if (opts.png !== false) {
    const pngPath = `${outBase}.png`;
    writeFileSync(pngPath, svgToPng(svg));
    result.pngPath = pngPath;
  }
  return result;
}

/** Experiment-name prefix of a CSV decides which figure it feeds. */
export function kindForFile(name: string): FigureKind | undefined {
  if (!name.endsWith(".csv")) return undefined;
  if (name.startsWith("walk-hist") && name.endsWith("_bins.csv")) return "walk-hist";
  if (name.startsWith("walk-hist")) return undefined; // summary rows, bins carry the plot
  if (name.startsWith("fpr")) return "overhead-load-fpr";
  if (name.startsWith("load-threshold")) return "achievable-load";
  if (name.startsWith("time-memory")) return "time-memory";
  if (name.startsWith("bench")) return "throughput-speedup";
  return undefined;
}

export interface RenderAllSummary {
  rendered: RenderResult[];
  skipped: { file: string; reason: string }[];
}

export function renderAll(inputDir: string, outDir: string, opts: RenderOptions = {}): RenderAllSummary {
  const summary: RenderAllSummary = { rendered: [], skipped: [] };
  for (const file of readdirSync(inputDir).sort()) {
    const kind = kindForFile(file);
    if (!kind) {
      if (file.endsWith(".csv")) {
        summary.skipped.push({ file, reason: "no figure kind for this file name" });
      }
      continue;
    }
    const outBase = join(outDir, basename(file, ".csv"));
    try {
      summary.rendered.push(renderFigure(kind, join(inputDir, file), outBase, opts));
    } catch (err) {
      summary.skipped.push({ file, reason: err instanceof Error ? err.message : String(err) });
    }
  }
  return summary;
}
