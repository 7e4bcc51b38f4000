"""Command-line interface: compile, bound, sample, query, decompose, serve.

Exit codes: 0 success, 1 user error, 2 infeasible-proven, 3 draw budget
exhausted before reaching the acceptance target.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bounds import preprocess
from .canonical import Tolerances
from .consistency import VERDICT_INFEASIBLE
from .focus import cross_clique_findings, decompose
from .model import NetworkError
from .sampler import DEFAULT_BINS, DEFAULT_MAX_DRAWS, DEFAULT_N_TARGET
from .session import RunParams, Session, create_session, get_results, run_pipeline
from .statements import ParseError, format_statement

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3


def _fmt(x: float) -> str:
    return "%.12g" % x


def _load(path: str) -> Session:
    text = Path(path).read_text()
    return create_session(text)


def _print_findings(session: Session, err) -> None:
    for f in session.findings():
        print(f"{f.severity}: [{f.code}] {f.message} ({f.statement_id})", file=err)


def _cmd_check(args, out, err) -> int:
    session = _load(args.file)
    _print_findings(session, err)
    system = session.compile()
    counts = system.by_statement()
    print(f"axioms: {counts.get(None, 0)} constraints", file=out)
    for stmt in session.statements:
        text = format_statement(stmt, session.network)
        print(f"{text}: {counts.get(stmt.id, 0)} constraints", file=out)
    print(f"total: {len(system.constraints)} constraints over k={system.k}", file=out)
    return EXIT_OK


def _cmd_bounds(args, out, err) -> int:
    session = _load(args.file)
    system = session.compile()
    pre = preprocess(system)
    if pre.box is None:
        print("infeasible: closed linear polytope is empty", file=err)
        return EXIT_INFEASIBLE
    table = session.network.table
    lines = ["index,assignment,lo,hi"]
    for i in range(system.k):
        digits = table.digits(i)
        assignment = " ".join(
            v.values[d] for v, d in zip(session.network.variables, digits)
        )
        lines.append(f"{i},{assignment},{_fmt(pre.box.lo[i])},{_fmt(pre.box.hi[i])}")
    _write(args.out, "\n".join(lines) + "\n", out)
    if not pre.feasible:
        labels = "; ".join(c.provenance.label for c in pre.violated_strict)
        print(f"infeasible: strict constraint(s) unsatisfiable: {labels}", file=err)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _run(session: Session, args) -> None:
    tol = Tolerances(eq=args.tol_eq) if args.tol_eq is not None else None
    run_pipeline(
        session,
        RunParams(
            n_target=args.n, max_draws=args.max_draws, seed=args.seed, bins=args.bins
        ),
        tolerances=tol,
    )


def _cmd_sample(args, out, err) -> int:
    session = _load(args.file)
    _run(session, args)
    results = session.results
    report = results.report
    print(f"verdict: {report.verdict}", file=out)
    print(f"accepted: {results.accepted}", file=out)
    print(f"draws: {results.draws_total}", file=out)
    print(f"acceptance_rate: {_fmt(results.acceptance_rate)}", file=out)
    print(f"seed: {results.params.seed}", file=out)
    for note in results.reduction_notes:
        print(f"note: {note}", file=out)
    if args.out and results.samples is not None:
        k = session.network.k
        rows = [",".join(f"x{i}" for i in range(k))]
        for row in results.samples:
            rows.append(",".join(_fmt(v) for v in row))
        Path(args.out).write_text("\n".join(rows) + "\n")
    if report.verdict == VERDICT_INFEASIBLE:
        print(f"evidence: {report.evidence}", file=err)
        return EXIT_INFEASIBLE
    if results.budget_exhausted:
        print(
            f"budget exhausted: {results.accepted} accepted in {results.draws_total} draws",
            file=err,
        )
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_query(args, out, err) -> int:
    session = _load(args.file)
    _run(session, args)
    results = session.results
    if results.report.verdict == VERDICT_INFEASIBLE:
        print(f"infeasible: {results.report.evidence}", file=err)
        return EXIT_INFEASIBLE
    if results.accepted == 0:
        print("no accepted samples within the draw budget", file=err)
        return EXIT_BUDGET
    dist, _, _ = get_results(session, args.query, args.bins)
    lines = ["bin_lo,bin_hi,count,density"]
    edges = dist.bin_edges
    for b in range(dist.bin_count):
        lines.append(
            f"{_fmt(edges[b])},{_fmt(edges[b + 1])},{int(dist.counts[b])},{_fmt(dist.densities[b])}"
        )
    lines.append(f"mean,{_fmt(dist.mean)},defined,{dist.defined_count}")
    lines.append(f"undefined,{dist.undefined_count},sample_sd,{_fmt(dist.sample_sd)}")
    _write(args.out, "\n".join(lines) + "\n", out)
    if results.budget_exhausted:
        print(
            f"budget exhausted: histogram from {results.accepted} partial samples",
            file=err,
        )
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_cliques(args, out, err) -> int:
    session = _load(args.file)
    tri, cliques = decompose(session.network)
    print("elimination order: " + " ".join(cliques.elimination_order), file=out)
    if tri.fill_edges:
        fills = "; ".join("-".join(sorted(e)) for e in sorted(tri.fill_edges, key=sorted))
        print(f"fill-in edges: {fills}", file=out)
    for i, c in enumerate(cliques.cliques, 1):
        print(f"clique {i}: {{{', '.join(sorted(c))}}}", file=out)
    for f in cross_clique_findings(session.statements, session.network, cliques):
        print(f"warning: [{f.code}] {f.message} ({f.statement_id})", file=err)
    return EXIT_OK


def _cmd_serve(args, out, err) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(directory=Path(args.dir) if args.dir else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _write(out_path: str | None, text: str, out) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        out.write(text)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--n", type=int, default=DEFAULT_N_TARGET, help="acceptance target")
    p.add_argument("--max-draws", type=int, default=DEFAULT_MAX_DRAWS, help="draw budget")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="histogram bins")
    p.add_argument("--tol-eq", type=float, default=None, help="equality tolerance band")
    p.add_argument("--out", default=None, help="write output to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefbox",
        description="Compile probability statements, bound and sample the compatible distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse, validate, and count compiled constraints")
    p.add_argument("file")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("bounds", help="per-constituent LP bounds")
    p.add_argument("file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sample", help="run the rejection sampler")
    p.add_argument("file")
    _add_run_flags(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("query", help="second-order histogram for a query")
    p.add_argument("file")
    p.add_argument("-q", "--query", required=True, help='e.g. "P(h | ~n, ~i, ~c)"')
    _add_run_flags(p)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("cliques", help="moralize, triangulate, list cliques")
    p.add_argument("file")
    p.set_defaults(func=_cmd_cliques)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8440)
    p.add_argument("--dir", default=None, help="session storage directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, sys.stdout, sys.stderr)
    except (ParseError, NetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
