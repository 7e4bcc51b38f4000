// View models for the workbench panels. Pure functions of the state and
// the relevant payloads; the DOM layer just walks these structures.

import { staleBadge, type WorkbenchState } from "./state.js";
import type {
  BoundsPayload,
  BoundsRow,
  CliquesPayload,
  ConsistencyPayload,
  StatementRow,
  StatementWarning,
} from "./types.js";

export interface StatementItem {
  id: string;
  text: string;
  kind: string;
  robustnessClass: string;
  warnings: StatementWarning[];
  inScope: boolean;
}

export interface StatementEditorModel {
  draft: string;
  findings: StatementWarning[];
  statements: StatementItem[];
  variableScope: string[] | null;
  staleBadge: boolean;
  submitDisabled: boolean;
}

export function statementEditorModel(state: WorkbenchState): StatementEditorModel {
  const scope = state.cliqueFilter;
  const rows: StatementRow[] = state.snapshot?.statements ?? [];
  return {
    draft: state.draft,
    findings: state.draftFindings,
    statements: rows.map((row) => ({
      id: row.id,
      text: row.text,
      kind: row.kind,
      robustnessClass: row.robustness_class,
      warnings: row.warnings,
      inScope: scope === null || scope.statementIds.includes(row.id),
    })),
    variableScope: scope ? scope.variables : null,
    staleBadge: staleBadge(state),
    submitDisabled: state.offline || state.snapshot === null,
  };
}

export interface RunControlsModel {
  nTarget: number;
  maxDraws: number;
  seed: number;
  bins: number;
  disabled: boolean;
  running: boolean;
}

// one in-flight run at a time: the control disables itself while running
export function runControlsModel(state: WorkbenchState): RunControlsModel {
  return {
    nTarget: state.runParams.n_target,
    maxDraws: state.runParams.max_draws,
    seed: state.runParams.seed,
    bins: state.runParams.bins,
    disabled: state.running || state.offline || state.snapshot === null,
    running: state.running,
  };
}

export interface BoundsTableModel {
  stale: boolean;
  feasible: boolean | null;
  rows: BoundsRow[];
}

export function boundsTableModel(payload: BoundsPayload): BoundsTableModel {
  return { stale: payload.stale, feasible: payload.feasible, rows: payload.rows };
}

export interface RevisionItem {
  statementId: string;
  kind: string;
  restoresFeasibility: boolean;
  evidence: string;
  // one-click removal target, relative to the service base URL
  removePath: string;
}

export interface ConsistencyPanelModel {
  verdict: string;
  evidence: string;
  suspects: string[];
  suggestions: RevisionItem[];
}

export function consistencyPanelModel(
  sessionId: string,
  payload: ConsistencyPayload,
): ConsistencyPanelModel {
  return {
    verdict: payload.verdict,
    evidence: payload.evidence,
    suspects: payload.suspects,
    suggestions: payload.suggestions.map((s) => ({
      statementId: s.statement_id,
      kind: s.kind,
      restoresFeasibility: s.restores_feasibility,
      evidence: s.evidence,
      removePath: `/sessions/${sessionId}/statements/${s.statement_id}`,
    })),
  };
}

export interface CliqueBrowserModel {
  eliminationOrder: string[];
  fillEdges: string[][];
  cliques: { index: number; variables: string[]; statementIds: string[]; selected: boolean }[];
  crossClique: { statementId: string | null; message: string }[];
}

export function cliqueBrowserModel(
  payload: CliquesPayload,
  selectedIndex: number | null,
): CliqueBrowserModel {
  return {
    eliminationOrder: payload.elimination_order,
    fillEdges: payload.fill_edges,
    cliques: payload.cliques.map((c, index) => ({
      index,
      variables: c.variables,
      statementIds: c.statement_ids,
      selected: index === selectedIndex,
    })),
    crossClique: payload.cross_clique.map((f) => ({
      statementId: f.statement_id,
      message: f.message,
    })),
  };
}
