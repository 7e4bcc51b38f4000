"""Inconsistency detection and robustness-ranked revision suggestions.

Verdicts follow an evidence hierarchy. An empty closed LP polytope or a
failed strict probe is a proof of infeasibility; at least one accepted sample
is a proof of consistency; zero acceptance within a draw budget proves
nothing about the nonlinear system, so the honest verdict for that case is
`suspect`, with the acceptance statistics attached.

Revision suggestions walk the statements from least to most robust:
qualitative signs outlive quantitative estimates, comparisons outlive
intervals, intervals outlive point values. For each candidate we drop its
constraints and re-run the LP-level checks; a statement whose removal
restores linear feasibility is concrete evidence the expert should look at it
first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import BoundsResult, extract_linear, probe_strict, solve_bounds
from .canonical import ConstraintSystem
from .sampler import SampleSet
from .statements import ROBUSTNESS_TIER, Statement

VERDICT_CONSISTENT = "consistent-witnessed"
VERDICT_INFEASIBLE = "infeasible-proven"
VERDICT_SUSPECT = "suspect"

# Most robust first. Kept as data so a deployment can re-order the tiers
# without touching the diagnosis code.
DEFAULT_ROBUSTNESS_POLICY = dict(ROBUSTNESS_TIER)


@dataclass
class Suggestion:
    statement_id: str
    kind: str
    restores_feasibility: bool
    evidence: str


@dataclass
class ConsistencyReport:
    verdict: str
    evidence: str
    suspects: list[str] = field(default_factory=list)
    witness: list[float] | None = None
    acceptance_rate: float | None = None
    draws_total: int | None = None
    suggestions: list[Suggestion] = field(default_factory=list)


def rank_robustness(
    statements: Sequence[Statement],
    policy: dict[str, int] | None = None,
) -> list[Statement]:
    """Statements ordered most-robust first; earlier statements win ties."""
    tiers = policy or DEFAULT_ROBUSTNESS_POLICY
    indexed = sorted(enumerate(statements), key=lambda t: (tiers[t[1].kind], t[0]))
    return [s for _, s in indexed]


def diagnose(
    system: ConstraintSystem,
    bounds_result: BoundsResult | None,
    sample_result: SampleSet | None,
    reduction_contradiction: str | None = None,
) -> ConsistencyReport:
    """Combine LP-level and sampling evidence into a verdict."""
    if bounds_result is not None and not bounds_result.feasible:
        if bounds_result.box is None:
            evidence = "closed linear polytope is empty (LP infeasibility certificate)"
        else:
            labels = [c.provenance.label for c in bounds_result.violated_strict]
            evidence = "strict constraint(s) unsatisfiable over the polytope: " + "; ".join(labels)
        suspects = sorted(
            {
                c.provenance.statement_id
                for c in bounds_result.violated_strict
                if c.provenance.statement_id
            }
        )
        return ConsistencyReport(VERDICT_INFEASIBLE, evidence, suspects=suspects)

    if reduction_contradiction is not None:
        return ConsistencyReport(
            VERDICT_INFEASIBLE,
            f"equality reduction derived a contradiction: {reduction_contradiction}",
        )

    if sample_result is not None and sample_result.n > 0:
        witness = [float(v) for v in sample_result.samples[0]]
        return ConsistencyReport(
            VERDICT_CONSISTENT,
            f"{sample_result.n} accepted sample(s); first kept as witness",
            witness=witness,
            acceptance_rate=sample_result.acceptance_rate,
            draws_total=sample_result.draws_total,
        )

    if sample_result is not None:
        return ConsistencyReport(
            VERDICT_SUSPECT,
            "zero acceptances within the draw budget; not a proof of infeasibility",
            acceptance_rate=sample_result.acceptance_rate,
            draws_total=sample_result.draws_total,
        )

    return ConsistencyReport(
        VERDICT_SUSPECT,
        "no sampling evidence yet; linear subset is feasible",
    )


def _linear_feasible(system: ConstraintSystem) -> bool:
    linear = extract_linear(system)
    box = solve_bounds(linear, system.k)
    if box is None:
        return False
    return not probe_strict(linear.strict, linear.closed, system.k)


def suggest_revision(
    report: ConsistencyReport,
    statements: Sequence[Statement],
    system: ConstraintSystem,
    policy: dict[str, int] | None = None,
) -> list[Suggestion]:
    """Greedy single-removal suggestions, least robust candidates first.

    Statements whose removal restores linear feasibility come first. When no
    single removal does (the conflict is nonlinear or multi-statement), the
    least robust statements are still listed, marked accordingly.
    """
    if report.verdict == VERDICT_CONSISTENT:
        raise ValueError("nothing to revise: the statement set has a witness")
    tiers = policy or DEFAULT_ROBUSTNESS_POLICY
    # least robust first; later statements first within a tier
    indexed = sorted(enumerate(statements), key=lambda t: (-tiers[t[1].kind], -t[0]))
    candidates = [s for _, s in indexed]
    restoring: list[Suggestion] = []
    rest: list[Suggestion] = []
    for stmt in candidates:
        reduced = system.without_statements({stmt.id})
        if _linear_feasible(reduced):
            restoring.append(
                Suggestion(
                    stmt.id,
                    stmt.kind,
                    True,
                    "removing this statement makes the linear subset feasible",
                )
            )
        else:
            rest.append(
                Suggestion(
                    stmt.id,
                    stmt.kind,
                    False,
                    "removal alone does not restore linear feasibility",
                )
            )
    suggestions = restoring + rest
    report.suggestions = suggestions
    if restoring:
        report.suspects = [s.statement_id for s in restoring]
    return suggestions
