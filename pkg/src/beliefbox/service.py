"""HTTP/JSON API over sessions, consumed by the workbench UI.

Error bodies are always {code, message, line?} with stable codes, so clients
can branch on `code` without parsing prose.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .focus import cross_clique_findings, decompose
from .model import NetworkError
from .sampler import DEFAULT_BINS, DEFAULT_MAX_DRAWS, DEFAULT_N_TARGET, AllUndefinedError
from .session import (
    RunParams,
    Session,
    SessionError,
    SessionStore,
    _hist_to_json,
    _report_to_json,
    get_results,
    run_pipeline,
)
from .statements import ParseError

_STATUS_BY_CODE = {
    "parse_error": 400,
    "validation_error": 400,
    "bad_request": 400,
    "session_not_found": 404,
    "statement_not_found": 404,
    "stale_results": 409,
    "no_results": 409,
    "no_samples": 409,
    "all_undefined": 409,
}


def _error(code: str, message: str, line: int | None = None) -> JSONResponse:
    body: dict = {"code": code, "message": message}
    if line is not None:
        body["line"] = line
    return JSONResponse(status_code=_STATUS_BY_CODE.get(code, 400), content=body)


class RunRequest(BaseModel):
    n_target: int = DEFAULT_N_TARGET
    max_draws: int = DEFAULT_MAX_DRAWS
    seed: int = 0
    bins: int = DEFAULT_BINS


def snapshot(session: Session) -> dict:
    findings: dict[str, list[dict]] = {}
    for f in session.findings():
        findings.setdefault(f.statement_id, []).append(
            {"severity": f.severity, "code": f.code, "message": f.message}
        )
    from .statements import format_statement

    results = session.results
    run = None
    if results is not None:
        run = {
            "digest": results.digest,
            "params": {
                "n_target": results.params.n_target,
                "max_draws": results.params.max_draws,
                "seed": results.params.seed,
                "bins": results.params.bins,
            },
            "accepted": results.accepted,
            "draws_total": results.draws_total,
            "acceptance_rate": results.acceptance_rate,
            "budget_exhausted": results.budget_exhausted,
            "feasible": results.bounds.feasible if results.bounds else None,
            "verdict": results.report.verdict,
            "reduction_notes": list(results.reduction_notes),
        }
    return {
        "id": session.id,
        "schema_version": session.schema_version,
        "digest": session.digest,
        "network": {
            "variables": [
                {"name": v.name, "values": list(v.values)} for v in session.network.variables
            ],
            "edges": [list(e) for e in session.network.edges],
            "k": session.network.k,
        },
        "statements": [
            {
                "id": s.id,
                "text": format_statement(s, session.network),
                "kind": s.kind,
                "robustness_class": s.robustness_class,
                "line": s.line,
                "warnings": findings.get(s.id, []),
            }
            for s in session.statements
        ],
        "has_results": results is not None,
        "results_stale": session.results_stale,
        "run": run,
    }


def _bounds_payload(session: Session) -> dict:
    results = session.results
    box = results.bounds.box if results.bounds else None
    table = session.network.table
    rows = []
    if box is not None:
        for i in range(session.network.k):
            digits = table.digits(i)
            assignment = ", ".join(
                v.values[d] for v, d in zip(session.network.variables, digits)
            )
            rows.append(
                {
                    "index": i,
                    "assignment": assignment,
                    "lo": float(box.lo[i]),
                    "hi": float(box.hi[i]),
                }
            )
    return {
        "digest": results.digest,
        "stale": session.results_stale,
        "feasible": results.bounds.feasible if results.bounds else None,
        "rows": rows,
    }


def create_app(store: SessionStore | None = None, directory: Path | None = None) -> FastAPI:
    if store is None:
        store = SessionStore(directory)
    app = FastAPI(title="beliefbox", docs_url=None, redoc_url=None)
    # the workbench page is typically served from another local origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ParseError)
    def _parse_error(request: Request, exc: ParseError):
        return _error("parse_error", exc.message, exc.line)

    @app.exception_handler(NetworkError)
    def _network_error(request: Request, exc: NetworkError):
        return _error("validation_error", str(exc))

    @app.exception_handler(SessionError)
    def _session_error(request: Request, exc: SessionError):
        return _error(exc.code, str(exc))

    @app.exception_handler(AllUndefinedError)
    def _all_undefined(request: Request, exc: AllUndefinedError):
        return _error("all_undefined", str(exc))

    @app.exception_handler(ValueError)
    def _value_error(request: Request, exc: ValueError):
        return _error("bad_request", str(exc))

    @app.post("/sessions", status_code=201)
    def create_session_ep(body: bytes = Body(..., media_type="text/plain")):
        session = store.create(body.decode("utf-8"))
        return {"id": session.id}

    @app.get("/sessions/{sid}")
    def get_session_ep(sid: str):
        return snapshot(store.get(sid))

    @app.post("/sessions/{sid}/statements")
    def add_statement_ep(sid: str, body: bytes = Body(..., media_type="text/plain")):
        session = store.get(sid)
        with store.lock(sid):
            stmt = session.add_statement(body.decode("utf-8"))
            store.persist(session)
        data = snapshot(session)
        data["added_statement_id"] = stmt.id
        return data

    @app.delete("/sessions/{sid}/statements/{stmt_id}")
    def remove_statement_ep(sid: str, stmt_id: str):
        session = store.get(sid)
        with store.lock(sid):
            session.remove_statement(stmt_id)
            store.persist(session)
        return snapshot(session)

    @app.post("/sessions/{sid}/run")
    def run_ep(sid: str, req: RunRequest | None = None):
        session = store.get(sid)
        req = req or RunRequest()
        with store.lock(sid):
            run_pipeline(
                session,
                RunParams(
                    n_target=req.n_target,
                    max_draws=req.max_draws,
                    seed=req.seed,
                    bins=req.bins,
                ),
            )
            store.persist(session)
        return snapshot(session)

    @app.get("/sessions/{sid}/results")
    def results_ep(sid: str, query: str, bins: int = DEFAULT_BINS):
        session = store.get(sid)
        dist, bounds, report = get_results(session, query, bins)
        store.persist(session)  # histogram cache grew
        payload = _hist_to_json(dist, session.network)
        return {
            "query": payload["query"],
            "bins": bins,
            "histogram": payload,
            "bounds": _bounds_payload(session) if bounds is not None else None,
            "report": _report_to_json(report),
        }

    @app.get("/sessions/{sid}/bounds")
    def bounds_ep(sid: str):
        session = store.get(sid)
        if session.results is None:
            return _error("no_results", "run the pipeline first")
        return _bounds_payload(session)

    @app.get("/sessions/{sid}/consistency")
    def consistency_ep(sid: str):
        session = store.get(sid)
        if session.results is None:
            return _error("no_results", "run the pipeline first")
        payload = _report_to_json(session.results.report)
        payload["stale"] = session.results_stale
        payload["digest"] = session.results.digest
        return payload

    @app.get("/sessions/{sid}/cliques")
    def cliques_ep(sid: str):
        session = store.get(sid)
        tri, cliques = decompose(session.network)
        findings = cross_clique_findings(session.statements, session.network, cliques)
        return {
            "elimination_order": list(cliques.elimination_order),
            "fill_edges": [sorted(e) for e in tri.fill_edges],
            "cliques": [
                {
                    "variables": sorted(c),
                    "statement_ids": [
                        s.id
                        for s in session.statements
                        if _stmt_vars(s, session) and _stmt_vars(s, session) <= c
                    ],
                }
                for c in cliques.cliques
            ],
            "cross_clique": [
                {"statement_id": f.statement_id, "message": f.message} for f in findings
            ],
        }

    return app


def _stmt_vars(stmt, session: Session):
    from .focus import statement_variables

    return statement_variables(stmt, session.network)
