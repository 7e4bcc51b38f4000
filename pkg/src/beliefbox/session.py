"""Sessions: a network, an evolving statement list, and cached run artifacts.

A session is the unit the CLI and the HTTP service operate on. Every artifact
(bounds, samples, histograms, consistency report) is stamped with the digest
of the statement set it was computed from; a mutation changes the digest, so
stale artifacts are detectable and never served as current.

Persistence is one JSON file per session with sorted keys plus, when the
retention cap allows, a plain-text numeric block holding the accepted sample
matrix at 12 significant digits. Both survive a save/load/save round trip
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import BoundsResult, preprocess
from .canonical import ConstraintSystem, Tolerances, compile_system
from .consistency import (
    VERDICT_CONSISTENT,
    ConsistencyReport,
    Suggestion,
    diagnose,
    suggest_revision,
)
from .model import Network
from .sampler import (
    DEFAULT_BINS,
    DEFAULT_MAX_DRAWS,
    DEFAULT_N_TARGET,
    InfeasiblePlanError,
    SampleSet,
    SecondOrderDistribution,
    reduce_equalities,
    run_rejection,
    second_order,
)
from .statements import (
    Finding,
    ParseError,
    Statement,
    format_network,
    format_prob,
    format_statement,
    parse_query,
    parse_statement_line,
    parse_statements,
    validate,
)

SCHEMA_VERSION = 1
SAMPLE_RETENTION_CAP = 1_000_000  # accepted * k beyond this: histograms only


class SessionError(Exception):
    code = "session_error"


class UnknownSessionError(SessionError):
    code = "session_not_found"


class UnknownStatementError(SessionError):
    code = "statement_not_found"


class StaleResultsError(SessionError):
    code = "stale_results"


class NoResultsError(SessionError):
    code = "no_results"


class NoSamplesError(SessionError):
    code = "no_samples"


@dataclass
class RunParams:
    n_target: int = DEFAULT_N_TARGET
    max_draws: int = DEFAULT_MAX_DRAWS
    seed: int = 0
    bins: int = DEFAULT_BINS


@dataclass
class RunResults:
    digest: str
    params: RunParams
    bounds: BoundsResult | None
    report: ConsistencyReport
    reduction_notes: tuple[str, ...] = ()
    accepted: int = 0
    draws_total: int = 0
    acceptance_rate: float = 0.0
    budget_exhausted: bool = False
    samples: np.ndarray | None = None
    samples_retained: bool = False
    histograms: dict[str, SecondOrderDistribution] = field(default_factory=dict)


class Session:
    def __init__(self, session_id: str, network: Network, statements: list[Statement]):
        self.id = session_id
        self.schema_version = SCHEMA_VERSION
        self.network = network
        self.statements = statements
        self.results: RunResults | None = None
        numbers = [int(s.id[1:]) for s in statements if s.id[1:].isdigit()]
        self._next_number = max(numbers, default=0) + 1

    # -- content identity ---------------------------------------------------

    @property
    def canonical_text(self) -> str:
        lines = [format_network(self.network)]
        lines += [format_statement(s, self.network) for s in self.statements]
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        payload = f"schema {self.schema_version}\n{self.canonical_text}"
        return hashlib.sha256(payload.encode()).hexdigest()

    @property
    def results_stale(self) -> bool:
        return self.results is not None and self.results.digest != self.digest

    # -- statement mutation ---------------------------------------------------

    def add_statement(self, line: str) -> Statement:
        body = parse_statement_line(line, self.network)
        stmt = Statement(id=f"s{self._next_number}", body=body, line=None)
        self._next_number += 1
        self.statements.append(stmt)
        return stmt

    def remove_statement(self, statement_id: str) -> Statement:
        for i, s in enumerate(self.statements):
            if s.id == statement_id:
                return self.statements.pop(i)
        raise UnknownStatementError(f"no statement {statement_id!r} in session {self.id}")

    def findings(self) -> list[Finding]:
        return validate(self.statements, self.network)

    def compile(self) -> ConstraintSystem:
        return compile_system(self.statements, self.network)


def create_session(dsl_text: str, session_id: str | None = None) -> Session:
    parsed = parse_statements(dsl_text)
    return Session(session_id or uuid.uuid4().hex[:12], parsed.network, parsed.statements)


# ---------------------------------------------------------------------------
# the pipeline

def run_pipeline(
    session: Session,
    params: RunParams | None = None,
    tolerances: Tolerances | None = None,
) -> RunResults:
    """compile -> bounds -> reduce -> sample -> diagnose, stored with digest."""
    params = params or RunParams()
    system = session.compile()
    digest = session.digest
    pre = preprocess(system)

    if not pre.feasible:
        report = diagnose(system, pre, None)
        suggest_revision(report, session.statements, system)
        results = RunResults(digest=digest, params=params, bounds=pre, report=report)
        session.results = results
        return results

    try:
        plan = reduce_equalities(system)
    except InfeasiblePlanError as exc:
        report = diagnose(system, pre, None, reduction_contradiction=str(exc))
        suggest_revision(report, session.statements, system)
        results = RunResults(digest=digest, params=params, bounds=pre, report=report)
        session.results = results
        return results

    sample_set = run_rejection(
        system,
        plan,
        n_target=params.n_target,
        max_draws=params.max_draws,
        seed=params.seed,
        box=pre.box,
        tolerances=tolerances,
    )
    report = diagnose(system, pre, sample_set)
    if report.verdict != VERDICT_CONSISTENT:
        suggest_revision(report, session.statements, system)

    retain = sample_set.n * session.network.k <= SAMPLE_RETENTION_CAP
    results = RunResults(
        digest=digest,
        params=params,
        bounds=pre,
        report=report,
        reduction_notes=sample_set.reduction_notes,
        accepted=sample_set.n,
        draws_total=sample_set.draws_total,
        acceptance_rate=sample_set.acceptance_rate,
        budget_exhausted=sample_set.budget_exhausted,
        samples=sample_set.samples if retain else None,
        samples_retained=retain,
    )
    session.results = results
    return results


def _histogram_key(query_text: str, bins: int) -> str:
    return f"{query_text}||{bins}"


def get_results(
    session: Session, query_text: str, bins: int = DEFAULT_BINS
) -> tuple[SecondOrderDistribution, BoundsResult | None, ConsistencyReport]:
    """Second-order distribution for a query, from the stored run.

    Raises StaleResultsError when statements changed since the run.
    """
    if session.results is None:
        raise NoResultsError("run the pipeline first")
    if session.results.digest != session.digest:
        raise StaleResultsError("statements changed since the last run; re-run the pipeline")
    results = session.results
    term = parse_query(query_text, session.network)
    key = _histogram_key(format_prob(session.network, term), bins)
    if key in results.histograms:
        return results.histograms[key], results.bounds, results.report
    if results.samples is None:
        if results.accepted == 0:
            raise NoSamplesError("the run accepted no samples")
        raise NoSamplesError(
            "sample matrix exceeded the retention cap; only cached histograms remain"
        )
    fake_set = SampleSet(
        samples=results.samples,
        draws_total=results.draws_total,
        seed=results.params.seed,
        acceptance_rate=results.acceptance_rate,
        reduction_notes=results.reduction_notes,
        budget_exhausted=results.budget_exhausted,
    )
    dist = second_order(fake_set, session.network, term, bins)
    results.histograms[key] = dist
    return dist, results.bounds, results.report


# ---------------------------------------------------------------------------
# persistence

def _report_to_json(report: ConsistencyReport) -> dict:
    return {
        "verdict": report.verdict,
        "evidence": report.evidence,
        "suspects": list(report.suspects),
        "witness": report.witness,
        "acceptance_rate": report.acceptance_rate,
        "draws_total": report.draws_total,
        "suggestions": [
            {
                "statement_id": s.statement_id,
                "kind": s.kind,
                "restores_feasibility": s.restores_feasibility,
                "evidence": s.evidence,
            }
            for s in report.suggestions
        ],
    }


def _report_from_json(data: dict) -> ConsistencyReport:
    return ConsistencyReport(
        verdict=data["verdict"],
        evidence=data["evidence"],
        suspects=list(data["suspects"]),
        witness=data["witness"],
        acceptance_rate=data["acceptance_rate"],
        draws_total=data["draws_total"],
        suggestions=[
            Suggestion(
                s["statement_id"], s["kind"], s["restores_feasibility"], s["evidence"]
            )
            for s in data["suggestions"]
        ],
    )


def _hist_to_json(dist: SecondOrderDistribution, network: Network) -> dict:
    return {
        "query": format_prob(network, dist.query),
        "bin_count": dist.bin_count,
        "counts": [int(c) for c in dist.counts],
        "densities": [float(d) for d in dist.densities],
        "mean": dist.mean,
        "sample_sd": dist.sample_sd,
        "defined_count": dist.defined_count,
        "undefined_count": dist.undefined_count,
    }


def _hist_from_json(data: dict, network: Network) -> SecondOrderDistribution:
    bin_count = data["bin_count"]
    return SecondOrderDistribution(
        query=parse_query(data["query"], network),
        bin_count=bin_count,
        counts=np.asarray(data["counts"], dtype=np.int64),
        densities=np.asarray(data["densities"], dtype=float),
        bin_edges=np.linspace(0.0, 1.0, bin_count + 1),
        mean=data["mean"],
        sample_sd=data["sample_sd"],
        defined_count=data["defined_count"],
        undefined_count=data["undefined_count"],
    )


def _bounds_to_json(pre: BoundsResult | None) -> dict | None:
    if pre is None:
        return None
    return {
        "feasible": pre.feasible,
        "lo": [float(v) for v in pre.box.lo] if pre.box is not None else None,
        "hi": [float(v) for v in pre.box.hi] if pre.box is not None else None,
        "violated_strict": [c.provenance.label for c in pre.violated_strict],
    }


def session_file(directory: Path, session_id: str) -> Path:
    return Path(directory) / f"{session_id}.session.json"


def _samples_file(directory: Path, session_id: str) -> Path:
    return Path(directory) / f"{session_id}.samples.txt"


def save_session(session: Session, directory: Path) -> Path:
    """Write the session (and its samples, when retained) to `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    results = session.results
    results_json = None
    samples_name = None
    if results is not None:
        if results.samples is not None:
            samples_name = _samples_file(directory, session.id).name
            rows = []
            for row in results.samples:
                rows.append(" ".join("%.12g" % v for v in row))
            (_samples_file(directory, session.id)).write_text(
                "\n".join(rows) + ("\n" if rows else "")
            )
        results_json = {
            "digest": results.digest,
            "params": {
                "n_target": results.params.n_target,
                "max_draws": results.params.max_draws,
                "seed": results.params.seed,
                "bins": results.params.bins,
            },
            "bounds": _bounds_to_json(results.bounds),
            "report": _report_to_json(results.report),
            "reduction_notes": list(results.reduction_notes),
            "accepted": results.accepted,
            "draws_total": results.draws_total,
            "acceptance_rate": results.acceptance_rate,
            "budget_exhausted": results.budget_exhausted,
            "samples_file": samples_name,
            "samples_retained": results.samples_retained,
            "histograms": {
                key: _hist_to_json(dist, session.network)
                for key, dist in results.histograms.items()
            },
        }
    data = {
        "schema_version": session.schema_version,
        "id": session.id,
        "network": format_network(session.network),
        "statements": [
            {"id": s.id, "text": format_statement(s, session.network)}
            for s in session.statements
        ],
        "next_statement_number": session._next_number,
        "digest": session.digest,
        "results": results_json,
    }
    path = session_file(directory, session.id)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def load_session(directory: Path, session_id: str) -> Session:
    directory = Path(directory)
    path = session_file(directory, session_id)
    if not path.exists():
        raise UnknownSessionError(f"no session {session_id!r} in {directory}")
    data = json.loads(path.read_text())
    parsed = parse_statements(data["network"])
    network = parsed.network
    statements = []
    for item in data["statements"]:
        body = parse_statement_line(item["text"], network)
        statements.append(Statement(id=item["id"], body=body, line=None))
    session = Session(data["id"], network, statements)
    session._next_number = data["next_statement_number"]

    rj = data.get("results")
    if rj is not None:
        samples = None
        if rj["samples_file"]:
            sample_path = directory / rj["samples_file"]
            text = sample_path.read_text()
            rows = [
                [float(tok) for tok in line.split()]
                for line in text.splitlines()
                if line.strip()
            ]
            samples = np.asarray(rows, dtype=float) if rows else np.zeros((0, network.k))
        bounds = None
        bj = rj["bounds"]
        if bj is not None:
            from .bounds import BoundsBox, LinearSubset

            box = None
            if bj["lo"] is not None:
                box = BoundsBox(np.asarray(bj["lo"]), np.asarray(bj["hi"]))
            bounds = BoundsResult(bj["feasible"], box, [], LinearSubset([], []))
        params = RunParams(**rj["params"])
        results = RunResults(
            digest=rj["digest"],
            params=params,
            bounds=bounds,
            report=_report_from_json(rj["report"]),
            reduction_notes=tuple(rj["reduction_notes"]),
            accepted=rj["accepted"],
            draws_total=rj["draws_total"],
            acceptance_rate=rj["acceptance_rate"],
            budget_exhausted=rj["budget_exhausted"],
            samples=samples,
            samples_retained=rj["samples_retained"],
            histograms={
                key: _hist_from_json(h, network) for key, h in rj["histograms"].items()
            },
        )
        session.results = results
    return session


class SessionStore:
    """Directory-backed session registry with per-session write locks."""

    def __init__(self, directory: Path | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id: str) -> threading.RLock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.RLock()
            return self._locks[session_id]

    def create(self, dsl_text: str) -> Session:
        session = create_session(dsl_text)
        self._sessions[session.id] = session
        self.persist(session)
        return session

    def get(self, session_id: str) -> Session:
        if session_id in self._sessions:
            return self._sessions[session_id]
        if self.directory is not None:
            session = load_session(self.directory, session_id)
            self._sessions[session_id] = session
            return session
        raise UnknownSessionError(f"no session {session_id!r}")

    def persist(self, session: Session) -> None:
        if self.directory is not None:
            save_session(session, self.directory)

    def ids(self) -> list[str]:
        known = set(self._sessions)
        if self.directory is not None and self.directory.exists():
            for p in self.directory.glob("*.session.json"):
                known.add(p.name.removesuffix(".session.json"))
        return sorted(known)
