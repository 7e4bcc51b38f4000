// Workbench state: the server snapshot plus purely local concerns (draft
// text, selections, in-flight flags). Nothing here computes probabilities;
// every number is copied from an API response.

import { ApiClient, ApiError } from "./api.js";
import type { SessionSnapshot, StatementWarning, RunParameters } from "./types.js";

export const DEFAULT_RUN_PARAMS: RunParameters = {
  n_target: 10_000,
  max_draws: 10_000_000,
  seed: 0,
  bins: 50,
};

export const DEFAULT_PANEL_ORDER = [
  "editor",
  "run",
  "histogram",
  "bounds",
  "consistency",
  "cliques",
] as const;

export interface CliqueFilter {
  index: number;
  variables: string[];
  statementIds: string[];
}

export interface WorkbenchState {
  sessionId: string | null;
  snapshot: SessionSnapshot | null;
  draft: string;
  draftFindings: StatementWarning[];
  selectedQuery: string;
  runParams: RunParameters;
  running: boolean;
  offline: boolean;
  lastError: ApiError | null;
  cliqueFilter: CliqueFilter | null;
  panelOrder: string[];
}

export function initialState(sessionId: string | null = null): WorkbenchState {
  return {
    sessionId,
    snapshot: null,
    draft: "",
    draftFindings: [],
    selectedQuery: "",
    runParams: { ...DEFAULT_RUN_PARAMS },
    running: false,
    offline: false,
    lastError: null,
    cliqueFilter: null,
    panelOrder: [...DEFAULT_PANEL_ORDER],
  };
}

/** True when the server has results it considers out of date. */
export function staleBadge(state: WorkbenchState): boolean {
  return state.snapshot !== null && state.snapshot.has_results && state.snapshot.results_stale;
}

/**
 * Pull the server snapshot into the state. Connection failures flip the
 * offline banner on and leave everything local (drafts above all) intact;
 * any other error lands in lastError.
 */
export async function syncSession(
  client: ApiClient,
  sessionId: string,
  prev?: WorkbenchState,
): Promise<WorkbenchState> {
  const state = prev ? { ...prev, sessionId } : initialState(sessionId);
  try {
    const snapshot = await client.getSession(sessionId);
    return { ...state, snapshot, offline: false, lastError: null };
  } catch (err) {
    if (err instanceof ApiError && err.isConnectionFailure) {
      return { ...state, offline: true };
    }
    return { ...state, lastError: err instanceof ApiError ? err : null };
  }
}

/** Replace the snapshot after a mutating call already returned the new one. */
export function acceptSnapshot(state: WorkbenchState, snapshot: SessionSnapshot): WorkbenchState {
  return { ...state, snapshot, offline: false, lastError: null };
}
