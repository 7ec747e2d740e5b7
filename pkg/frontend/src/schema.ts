/**
 * Experiment CSV schema: one row per measurement, preceded by a versioned
 * comment line.  Parsing fails loudly on missing or unexpected columns so
 * a schema drift between producer and plots is caught immediately.
 */

export interface ExperimentRecord {
  variant: string;
  l: number;
  k: number;
  n: number;
  s: number;
  load_fraction: number;
  max_walk: number;
  F: number;
  threads: number;
  seed: number;
  achieved_load: number;
  empirical_fpr: number;
  overhead_C: number;
  insert_throughput: number;
  lookup_throughput: number;
  walk_p50: number;
  walk_p99: number;
  walk_max: number;
  walk_zero_frac: number;
  wall_time_s: number;
  memory_bytes: number;
}

export const RECORD_COLUMNS = [
  "variant",
  "l",
  "k",
  "n",
  "s",
  "load_fraction",
  "max_walk",
  "F",
  "threads",
  "seed",
  "achieved_load",
  "empirical_fpr",
  "overhead_C",
  "insert_throughput",
  "lookup_throughput",
  "walk_p50",
  "walk_p99",
  "walk_max",
  "walk_zero_frac",
  "wall_time_s",
  "memory_bytes",
] as const;

export interface WalkBin {
  variant: string;
  l: number;
  k: number;
  n: number;
  seed: number;
  walk_len: number;
  count: number;
}

export const WALK_BIN_COLUMNS = ["variant", "l", "k", "n", "seed", "walk_len", "count"] as const;

function splitCsv(text: string): string[][] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0 && !line.startsWith("#"))
    .map((line) => line.split(","));
}

function checkHeader(header: string[], expected: readonly string[], source: string): void {
  for (const col of expected) {
    if (!header.includes(col)) {
      throw new Error(`${source}: missing CSV column '${col}'`);
    }
  }
}

function toNumber(raw: string, column: string, source: string): number {
  if (raw === "nan") return NaN;
  const value = Number(raw);
  if (raw === "" || Number.isNaN(value)) {
    throw new Error(`${source}: column '${column}' holds non-numeric value '${raw}'`);
  }
  return value;
}

export function parseRecords(text: string, source = "<csv>"): ExperimentRecord[] {
  const rows = splitCsv(text);
  if (rows.length === 0) {
    throw new Error(`${source}: empty CSV`);
  }
  const header = rows[0];
  checkHeader(header, RECORD_COLUMNS, source);
  const index = new Map(header.map((name, i) => [name, i]));
  return rows.slice(1).map((cells) => {
    if (cells.length !== header.length) {
      throw new Error(`${source}: row has ${cells.length} cells, header has ${header.length}`);
    }
    const pick = (name: string) => cells[index.get(name)!];
    const num = (name: string) => toNumber(pick(name), name, source);
    return {
      variant: pick("variant"),
      l: num("l"),
      k: num("k"),
      n: num("n"),
      s: num("s"),
      load_fraction: num("load_fraction"),
      max_walk: num("max_walk"),
      F: num("F"),
      threads: num("threads"),
      seed: num("seed"),
      achieved_load: num("achieved_load"),
      empirical_fpr: num("empirical_fpr"),
      overhead_C: num("overhead_C"),
      insert_throughput: num("insert_throughput"),
      lookup_throughput: num("lookup_throughput"),
      walk_p50: num("walk_p50"),
      walk_p99: num("walk_p99"),
      walk_max: num("walk_max"),
      walk_zero_frac: num("walk_zero_frac"),
      wall_time_s: num("wall_time_s"),
      memory_bytes: num("memory_bytes"),
    };
  });
}

export function parseWalkBins(text: string, source = "<csv>"): WalkBin[] {
  const rows = splitCsv(text);
  if (rows.length === 0) {
    throw new Error(`${source}: empty CSV`);
  }
  const header = rows[0];
  checkHeader(header, WALK_BIN_COLUMNS, source);
  const index = new Map(header.map((name, i) => [name, i]));
  return rows.slice(1).map((cells) => {
    const pick = (name: string) => cells[index.get(name)!];
    const num = (name: string) => toNumber(pick(name), name, source);
    return {
      variant: pick("variant"),
      l: num("l"),
      k: num("k"),
      n: num("n"),
      seed: num("seed"),
      walk_len: num("walk_len"),
      count: num("count"),
    };
  });
}

/** Stable label and ordering for a (variant, group size) series. */
export function seriesKey(variant: string, l: number): string {
  return `${variant} (2,${l})`;
}

export function groupBy<T>(items: T[], key: (item: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = out.get(k);
    if (bucket) bucket.push(item);
    else out.set(k, [item]);
  }
  return out;
}
