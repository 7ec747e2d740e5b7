/**
 * Rounded theoretical load thresholds for 2-ary cuckoo hashing with
 * buckets or windows of l slots.  These are constants of the layouts,
 * drawn as reference lines; they are not measurements.
 */

export const BUCKET_THRESHOLDS: Record<number, number> = {
  1: 0.5,
  2: 0.897,
  3: 0.9591,
  4: 0.9803,
};

export const WINDOW_THRESHOLDS: Record<number, number> = {
  1: 0.5,
  2: 0.9649,
  3: 0.9944,
  4: 0.9989,
};

export function loadThreshold(variant: string, l: number): number {
  const table = variant === "windowed" ? WINDOW_THRESHOLDS : BUCKET_THRESHOLDS;
  const value = table[l];
  if (value === undefined) {
    throw new Error(`no load threshold for variant=${variant} l=${l}`);
  }
  return value;
}

/** One stable color per (variant, l) series across every figure. */
export const SERIES_COLORS: Record<string, string> = {
  "windowed (2,2)": "#1f77b4",
  "windowed (2,4)": "#2ca02c",
  "bucketed (2,2)": "#ff7f0e",
  "bucketed (2,4)": "#d62728",
  "xor (2,4)": "#9467bd",
};

export function seriesColor(key: string): string {
  return SERIES_COLORS[key] ?? "#7f7f7f";
}
