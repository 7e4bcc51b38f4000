// Chart model for second-order histograms. The server ships normalized
// per-bin masses (they sum to 1); bars carry true density heights, mass
// over bin width, so sum(height * width) is 1 up to the server's own
// normalization error.

import type { HistogramPayload } from "./types.js";

export interface HistogramBar {
  x0: number;
  x1: number;
  height: number;
  count: number;
}

export interface ChartModel {
  kind: "chart" | "empty";
  query: string;
  bars: HistogramBar[];
  binWidth: number;
  meanMarker: number | null;
  sampleSd: number | null;
  definedCount: number;
  undefinedCount: number;
  notice?: string;
}

export function renderHistogram(hist: HistogramPayload): ChartModel {
  if (hist.defined_count === 0) {
    return {
      kind: "empty",
      query: hist.query,
      bars: [],
      binWidth: 0,
      meanMarker: null,
      sampleSd: null,
      definedCount: 0,
      undefinedCount: hist.undefined_count,
      notice: "the query is undefined in every accepted sample",
    };
  }
  const width = 1 / hist.bin_count;
  const bars: HistogramBar[] = hist.densities.map((density, i) => ({
    x0: i * width,
    x1: (i + 1) * width,
    height: density * hist.bin_count,
    count: hist.counts[i],
  }));
  return {
    kind: "chart",
    query: hist.query,
    bars,
    binWidth: width,
    meanMarker: hist.mean,
    sampleSd: hist.sample_sd,
    definedCount: hist.defined_count,
    undefinedCount: hist.undefined_count,
  };
}
