// Thin typed client over the session service. Errors carry the service's
// stable code ("parse_error", "stale_results", ...); a status of 0 means
// the request never reached the server.

import type {
  BoundsPayload,
  CliquesPayload,
  ConsistencyPayload,
  ResultsPayload,
  RunParameters,
  SessionSnapshot,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
    public line?: number,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isConnectionFailure(): boolean {
    return this.status === 0;
  }
}

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(
    public baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: string | object): Promise<T> {
    const init: RequestInit = { method };
    if (typeof body === "string") {
      init.body = body;
      init.headers = { "content-type": "text/plain" };
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "content-type": "application/json" };
    }
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError("connection_failed", String(err), 0);
    }
    if (resp.ok) {
      return (await resp.json()) as T;
    }
    let code = "http_error";
    let message = `${resp.status} ${resp.statusText}`;
    let line: number | undefined;
    try {
      const data = await resp.json();
      if (data && typeof data.code === "string") {
        code = data.code;
        message = data.message ?? message;
        line = typeof data.line === "number" ? data.line : undefined;
      }
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(code, message, resp.status, line);
  }

  createSession(dsl: string): Promise<{ id: string }> {
    return this.request("POST", "/sessions", dsl);
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${id}`);
  }

  addStatement(id: string, statementLine: string): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${id}/statements`, statementLine);
  }

  removeStatement(id: string, statementId: string): Promise<SessionSnapshot> {
    return this.request("DELETE", `/sessions/${id}/statements/${statementId}`);
  }

  run(id: string, params: RunParameters): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${id}/run`, params);
  }

  results(id: string, query: string, bins?: number): Promise<ResultsPayload> {
    const q = new URLSearchParams({ query });
    if (bins !== undefined) q.set("bins", String(bins));
    return this.request("GET", `/sessions/${id}/results?${q.toString()}`);
  }

  bounds(id: string): Promise<BoundsPayload> {
    return this.request("GET", `/sessions/${id}/bounds`);
  }

  consistency(id: string): Promise<ConsistencyPayload> {
    return this.request("GET", `/sessions/${id}/consistency`);
  }

  cliques(id: string): Promise<CliquesPayload> {
    return this.request("GET", `/sessions/${id}/cliques`);
  }
}
