import { mkdtempSync, readFileSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import {
  achievableLoadFigure,
  overheadLoadFprFigure,
  throughputSpeedupFigure,
  timeMemoryFigure,
  walkHistFigure,
} from "../src/figures.js";
import { buildOption, kindForFile, optionToSvg, renderAll, renderFigure, svgToPng } from "../src/render.js";
import { parseRecords, parseWalkBins } from "../src/schema.js";

const FIXTURES = join(__dirname, "..", "fixtures");

const fixture = (name: string) => readFileSync(join(FIXTURES, name), "utf-8");

describe("schema parsing", () => {
  it("reads experiment rows from a fixture", () => {
    const records = parseRecords(fixture("fpr_seed7.csv"), "fpr_seed7.csv");
    expect(records.length).toBe(20); // 4 variants x 5 values of k
    for (const r of records) {
      expect(r.achieved_load).toBeGreaterThan(0);
      expect(r.achieved_load).toBeLessThan(1);
      expect(r.empirical_fpr).toBeLessThan(1);
    }
  });

  it("fails loudly on a missing column", () => {
    const text = "a,b,c\n1,2,3\n";
    expect(() => parseRecords(text, "broken.csv")).toThrowError(/missing CSV column 'variant'/);
  });

  it("fails loudly on empty input", () => {
    expect(() => parseRecords("# only a comment\n", "empty.csv")).toThrowError(/empty/);
  });

  it("treats nan as a missing measurement, not an error", () => {
    const records = parseRecords(fixture("load-threshold_seed7.csv"));
    expect(records.some((r) => Number.isNaN(r.empirical_fpr))).toBe(true);
  });

  it("reads walk histogram bins", () => {
    const bins = parseWalkBins(fixture("walk-hist_seed7_bins.csv"));
    expect(bins.length).toBeGreaterThan(4);
    const zero = bins.filter((b) => b.walk_len === 0);
    expect(zero.length).toBe(4); // one zero bin per variant series
  });
});

describe("figure options", () => {
  it("fpr figure carries the zero reference line", () => {
    const option = overheadLoadFprFigure(parseRecords(fixture("fpr_seed7.csv")));
    const lines = JSON.stringify(option);
    expect(lines).toContain('"markLine"');
    expect(lines).toContain('"yAxis":0');
    const grids = option.grid as object[];
    expect(grids.length).toBe(3);
  });

  it("walk histogram uses a log y axis", () => {
    const option = walkHistFigure(parseWalkBins(fixture("walk-hist_seed7_bins.csv")));
    expect((option.yAxis as { type: string }).type).toBe("log");
  });

  it("time-memory figure has two panels with threshold marklines", () => {
    const option = timeMemoryFigure(parseRecords(fixture("time-memory_seed7.csv")));
    expect((option.grid as object[]).length).toBe(2);
    expect(JSON.stringify(option)).toContain("0.9649");
  });

  it("achievable-load figure draws a band per series", () => {
    const option = achievableLoadFigure(parseRecords(fixture("load-threshold_seed7.csv")));
    const stacks = (option.series as { stack?: string }[]).filter((s) => s.stack);
    expect(stacks.length).toBeGreaterThanOrEqual(8); // two band series per config
    expect((option.xAxis as { type: string }).type).toBe("log");
  });

  it("throughput figure normalizes speedup to one thread", () => {
    const option = throughputSpeedupFigure(parseRecords(fixture("bench_seed7.csv")));
    const speedups = (option.series as { yAxisIndex?: number; data: [number, number][] }[]).filter(
      (s) => s.yAxisIndex === 1 && s.data.length > 0 && s.data[0].length === 2
    );
    for (const s of speedups) {
      const oneThread = s.data.find(([t]) => t === 1);
      if (oneThread) expect(oneThread[1]).toBeCloseTo(1, 6);
    }
  });

  it("refuses to plot empty row sets", () => {
    expect(() => walkHistFigure([])).toThrowError(/no data rows/);
  });
});

describe("rendering", () => {
  it("renders a single-row CSV into a valid figure", () => {
    const text = fixture("fpr_seed7.csv");
    const lines = text.split("\n").filter((l) => l.trim());
    const single = lines.slice(0, 3).join("\n") + "\n"; // comment + header + one row
    const option = buildOption("overhead-load-fpr", single, "single.csv");
    const svg = optionToSvg(option);
    expect(svg).toContain("<svg");
  });

  it("produces svg and png files for every kind", () => {
    const out = mkdtempSync(join(tmpdir(), "wckplots-"));
    const inputs: [string, string][] = [
      ["overhead-load-fpr", "fpr_seed7.csv"],
      ["achievable-load", "load-threshold_seed7.csv"],
      ["time-memory", "time-memory_seed7.csv"],
      ["throughput-speedup", "bench_seed7.csv"],
      ["walk-hist", "walk-hist_seed7_bins.csv"],
    ];
    for (const [kind, file] of inputs) {
      const result = renderFigure(kind as never, join(FIXTURES, file), join(out, kind));
      const svg = readFileSync(result.svgPath, "utf-8");
      expect(svg).toContain("<svg");
      const png = readFileSync(result.pngPath!);
      expect(png.subarray(1, 4).toString()).toBe("PNG");
    }
  });

  it("png conversion round-trips an svg", () => {
    const svg = optionToSvg(
      walkHistFigure(parseWalkBins(fixture("walk-hist_seed7_bins.csv")))
    );
    const png = svgToPng(svg);
    expect(png.length).toBeGreaterThan(1000);
  });
});

describe("render-all discovery", () => {
  it("maps file prefixes to figure kinds", () => {
    expect(kindForFile("fpr_seed7.csv")).toBe("overhead-load-fpr");
    expect(kindForFile("load-threshold_seed7.csv")).toBe("achievable-load");
    expect(kindForFile("time-memory_seed7.csv")).toBe("time-memory");
    expect(kindForFile("bench_seed7.csv")).toBe("throughput-speedup");
    expect(kindForFile("walk-hist_seed7_bins.csv")).toBe("walk-hist");
    expect(kindForFile("walk-hist_seed7.csv")).toBeUndefined();
    expect(kindForFile("notes.txt")).toBeUndefined();
  });

  it("renders a whole directory and reports skips", () => {
    const out = mkdtempSync(join(tmpdir(), "wckplots-all-"));
    const summary = renderAll(FIXTURES, out);
    const kinds = summary.rendered.map((r) => r.kind).sort();
    expect(kinds).toEqual([
      "achievable-load",
      "overhead-load-fpr",
      "throughput-speedup",
      "time-memory",
      "walk-hist",
    ]);
    expect(readdirSync(out).filter((f) => f.endsWith(".svg")).length).toBe(5);
    expect(readdirSync(out).filter((f) => f.endsWith(".png")).length).toBe(5);
  });

  it("is idempotent across reruns", () => {
    const out = mkdtempSync(join(tmpdir(), "wckplots-rerun-"));
    const first = renderAll(FIXTURES, out);
    const bytes = readFileSync(join(out, "fpr_seed7.svg"));
    const second = renderAll(FIXTURES, out);
    expect(second.rendered.length).toBe(first.rendered.length);
    expect(readFileSync(join(out, "fpr_seed7.svg")).equals(bytes)).toBe(true);
  });

  it("keeps rendering when one file is invalid", () => {
    const out = mkdtempSync(join(tmpdir(), "wckplots-bad-"));
    const dir = mkdtempSync(join(tmpdir(), "wckplots-mixed-"));
    const { writeFileSync, copyFileSync } = require("node:fs");
    copyFileSync(join(FIXTURES, "fpr_seed7.csv"), join(dir, "fpr_good.csv"));
    writeFileSync(join(dir, "time-memory_bad.csv"), "a,b\n1,2\n");
    const summary = renderAll(dir, out);
    expect(summary.rendered.length).toBe(1);
    expect(summary.skipped.length).toBe(1);
    expect(summary.skipped[0].reason).toMatch(/missing CSV column/);
  });

  it("empty directory renders nothing and reports nothing fatal", () => {
    const empty = mkdtempSync(join(tmpdir(), "wckplots-empty-"));
    const out = mkdtempSync(join(tmpdir(), "wckplots-emptyout-"));
    const summary = renderAll(empty, out);
    expect(summary.rendered.length).toBe(0);
    expect(summary.skipped.length).toBe(0);
  });
});
