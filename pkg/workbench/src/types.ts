// Wire types for the session service. Field names match the JSON bodies
// one to one; every number the UI shows comes straight from these.

export interface StatementWarning {
  severity: string;
  code: string;
  message: string;
}

export interface StatementRow {
  id: string;
  text: string;
  kind: string;
  robustness_class: string;
  line: number | null;
  warnings: StatementWarning[];
}

export interface NetworkInfo {
  variables: { name: string; values: string[] }[];
  edges: string[][];
  k: number;
}

export interface RunInfo {
  digest: string;
  params: { n_target: number; max_draws: number; seed: number; bins: number };
  accepted: number;
  draws_total: number;
  acceptance_rate: number;
  budget_exhausted: boolean;
  feasible: boolean | null;
  verdict: string;
  reduction_notes: string[];
}

export interface SessionSnapshot {
  id: string;
  schema_version: number;
  digest: string;
  network: NetworkInfo;
  statements: StatementRow[];
  has_results: boolean;
  results_stale: boolean;
  run: RunInfo | null;
  added_statement_id?: string;
}

export interface HistogramPayload {
  query: string;
  bin_count: number;
  counts: number[];
  densities: number[];
  mean: number;
  sample_sd: number;
  defined_count: number;
  undefined_count: number;
}

export interface BoundsRow {
  index: number;
  assignment: string;
  lo: number;
  hi: number;
}

export interface BoundsPayload {
  digest: string;
  stale: boolean;
  feasible: boolean | null;
  rows: BoundsRow[];
}

export interface Suggestion {
  statement_id: string;
  kind: string;
  restores_feasibility: boolean;
  evidence: string;
}

export interface ConsistencyPayload {
  verdict: string;
  evidence: string;
  suspects: string[];
  witness: number[] | null;
  acceptance_rate: number | null;
  draws_total: number | null;
  suggestions: Suggestion[];
  stale?: boolean;
  digest?: string;
}

export interface ResultsPayload {
  query: string;
  bins: number;
  histogram: HistogramPayload;
  bounds: BoundsPayload | null;
  report: ConsistencyPayload;
}

export interface CliqueInfo {
  variables: string[];
  statement_ids: string[];
}

export interface CliquesPayload {
  elimination_order: string[];
  fill_edges: string[][];
  cliques: CliqueInfo[];
  cross_clique: { statement_id: string | null; message: string }[];
}

export interface RunParameters {
  n_target: number;
  max_draws: number;
  seed: number;
  bins: number;
}
