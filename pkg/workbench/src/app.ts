// Action layer: everything a user can do from the page, expressed as
// methods that call the service and fold the response into the state.
// Drafts are optimistic (kept locally through failures); results are
// pessimistic (always re-fetched, never recomputed here).

import { ApiClient, ApiError } from "./api.js";
import { acceptSnapshot, initialState, syncSession, type WorkbenchState } from "./state.js";
import type { CliquesPayload, ResultsPayload, RunParameters } from "./types.js";

export class WorkbenchApp {
  state: WorkbenchState;
  cliques: CliquesPayload | null = null;

  constructor(
    readonly client: ApiClient,
    sessionId: string | null = null,
  ) {
    this.state = initialState(sessionId);
  }

  /** Create a session from DSL text and load its snapshot. */
  async open(dsl: string): Promise<void> {
    const { id } = await this.client.createSession(dsl);
    this.state = await syncSession(this.client, id, this.state);
  }

  async sync(): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session open");
    this.state = await syncSession(this.client, this.state.sessionId, this.state);
  }

  setDraft(text: string): void {
    this.state = { ...this.state, draft: text, draftFindings: [] };
  }

  setQuery(query: string): void {
    this.state = { ...this.state, selectedQuery: query };
  }

  setRunParams(params: Partial<RunParameters>): void {
    this.state = { ...this.state, runParams: { ...this.state.runParams, ...params } };
  }

  /**
   * Submit the draft statement. On success the draft clears and the server
   * snapshot (one statement longer, results marked stale) replaces the old
   * one. Validation problems become inline findings and the draft survives.
   */
  async submitDraft(): Promise<boolean> {
    const line = this.state.draft.trim();
    if (!this.state.sessionId || line === "") return false;
    try {
      const snapshot = await this.client.addStatement(this.state.sessionId, line);
      this.state = { ...acceptSnapshot(this.state, snapshot), draft: "", draftFindings: [] };
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.isConnectionFailure) {
        this.state = { ...this.state, offline: true };
        return false;
      }
      if (err instanceof ApiError) {
        const where = err.line !== undefined ? ` (line ${err.line})` : "";
        this.state = {
          ...this.state,
          draftFindings: [{ severity: "error", code: err.code, message: err.message + where }],
        };
        return false;
      }
      throw err;
    }
  }

  async removeStatement(statementId: string): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session open");
    const snapshot = await this.client.removeStatement(this.state.sessionId, statementId);
    this.state = acceptSnapshot(this.state, snapshot);
  }

  /** Run the pipeline; rejects if a run is already in flight. */
  async run(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) throw new Error("no session open");
    if (this.state.running) throw new Error("a run is already in flight");
    this.state = { ...this.state, running: true };
    try {
      const snapshot = await this.client.run(sessionId, this.state.runParams);
      this.state = acceptSnapshot(this.state, snapshot);
    } finally {
      this.state = { ...this.state, running: false };
    }
  }

  async results(query?: string, bins?: number): Promise<ResultsPayload> {
    if (!this.state.sessionId) throw new Error("no session open");
    const q = query ?? this.state.selectedQuery;
    if (q === "") throw new Error("no query selected");
    return this.client.results(this.state.sessionId, q, bins ?? this.state.runParams.bins);
  }

  async refreshCliques(): Promise<CliquesPayload> {
    if (!this.state.sessionId) throw new Error("no session open");
    this.cliques = await this.client.cliques(this.state.sessionId);
    return this.cliques;
  }

  /** Scope the statement editor to one clique, or null to clear. */
  selectClique(index: number | null): void {
    if (index === null) {
      this.state = { ...this.state, cliqueFilter: null };
      return;
    }
    if (!this.cliques) throw new Error("cliques not loaded");
    const clique = this.cliques.cliques[index];
    if (!clique) throw new Error(`no clique ${index}`);
    this.state = {
      ...this.state,
      cliqueFilter: {
        index,
        variables: clique.variables,
        statementIds: clique.statement_ids,
      },
    };
  }
}
