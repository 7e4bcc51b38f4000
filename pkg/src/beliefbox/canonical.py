"""Compilation of statements into polynomial (in)equalities.

Every statement becomes one or more constraints over the constituent
probabilities x_0..x_{k-1}. Conditionals are cross-multiplied (denominators
are nonnegative sums of constituents, so multiplying through preserves the
relation wherever the denominators are positive; strict positivity of each
denominator is emitted as its own constraint). Qualitative influences and
synergies expand into one inequality per (threshold value, value pair,
context assignment) tuple.

Emission is raw: the same positivity constraint appearing under two
statements is emitted twice. `normalize` deduplicates explicitly, so that
the per-statement constraint counts stay inspectable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import Event, Network, index_set, joint_indices
from .statements import (
    AdditiveSynergy,
    Comparison,
    Influence,
    IntervalConditional,
    IntervalPrior,
    PointConditional,
    PointPrior,
    ProbTerm,
    ProductSynergy,
    Statement,
)

DEFAULT_TOL_EQ = 2e-3
DEFAULT_TOL_INEQ = 1e-9

ROLE_AXIOM = "axiom"
ROLE_MAIN = "main"
ROLE_POSITIVITY = "positivity"

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class Polynomial:
    """Sum of coefficient * product-of-constituents terms, canonicalized.

    Monomials are sorted index multisets; terms are unique, ordered by
    (degree, monomial), with exact-zero coefficients removed.
    """

    terms: tuple[tuple[float, Monomial], ...] = ()

    @staticmethod
    def make(pairs: Iterable[tuple[float, Monomial]]) -> "Polynomial":
        acc: dict[Monomial, float] = {}
        for coef, mono in pairs:
            mono = tuple(sorted(mono))
            acc[mono] = acc.get(mono, 0.0) + float(coef)
        terms = tuple(
            (c, m) for m, c in sorted(acc.items(), key=lambda it: (len(it[0]), it[0])) if c != 0.0
        )
        return Polynomial(terms)

    @staticmethod
    def linear(indices: Sequence[int], coef: float = 1.0) -> "Polynomial":
        return Polynomial.make((coef, (int(i),)) for i in indices)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.make(list(self.terms) + list(other.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.make(list(self.terms) + [(-c, m) for c, m in other.terms])

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial.make(
            (c1 * c2, m1 + m2) for c1, m1 in self.terms for c2, m2 in other.terms
        )

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial.make((factor * c, m) for c, m in self.terms)

    @property
    def degree(self) -> int:
        return max((len(m) for _, m in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @cached_property
    def _batch_plan(self) -> list[tuple[float, np.ndarray]]:
        return [(c, np.asarray(m, dtype=np.int64)) for c, m in self.terms]

    def evaluate(self, x: np.ndarray) -> float:
        return float(sum(c * np.prod(x[list(m)]) for c, m in self.terms))

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for c, mono in self._batch_plan:
            out += c * np.prod(X[:, mono], axis=1)
        return out

    def linear_parts(self) -> tuple[dict[int, float], float] | None:
        """(coefficients by index, constant) when degree <= 1, else None."""
        coefs: dict[int, float] = {}
        const = 0.0
        for c, m in self.terms:
            if len(m) == 0:
                const += c
            elif len(m) == 1:
                coefs[m[0]] = coefs.get(m[0], 0.0) + c
            else:
                return None
        return coefs, const


@dataclass(frozen=True)
class Provenance:
    statement_id: str | None
    role: str
    label: str = ""
    merged_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Constraint:
    """lhs <relation> rhs with relation one of =, >=, >.

    <= and < are stored negated, so a single orientation covers everything.
    """

    lhs: Polynomial
    relation: str
    rhs: float
    provenance: Provenance
    redundant: bool = False

    @property
    def strict(self) -> bool:
        return self.relation == ">"

    @property
    def degree(self) -> int:
        return self.lhs.degree


@dataclass(frozen=True)
class ConstraintSystem:
    k: int
    constraints: tuple[Constraint, ...]
    dedup_applied: bool = False

    def by_statement(self) -> dict[str | None, int]:
        """Constraint counts keyed by originating statement id (None = axioms)."""
        counts: dict[str | None, int] = {}
        for c in self.constraints:
            sid = c.provenance.statement_id
            counts[sid] = counts.get(sid, 0) + 1
        return counts

    def without_statements(self, ids: set[str]) -> "ConstraintSystem":
        kept = tuple(c for c in self.constraints if c.provenance.statement_id not in ids)
        return ConstraintSystem(self.k, kept, self.dedup_applied)


@dataclass
class Tolerances:
    """Evaluation tolerances; equality bands may be overridden per statement."""

    eq: float = DEFAULT_TOL_EQ
    ineq: float = DEFAULT_TOL_INEQ
    per_statement: dict[str, float] = field(default_factory=dict)

    def eq_for(self, statement_id: str | None) -> float:
        if statement_id is not None and statement_id in self.per_statement:
            return self.per_statement[statement_id]
        return self.eq


@dataclass(frozen=True)
class EvalResult:
    satisfied: bool
    residual: float


def eval_constraint(constraint: Constraint, x: np.ndarray, tolerances: Tolerances | None = None) -> EvalResult:
    tol = tolerances or Tolerances()
    residual = constraint.lhs.evaluate(x) - constraint.rhs
    return EvalResult(_satisfied(constraint, residual, tol), residual)


def _satisfied(constraint: Constraint, residual: float, tol: Tolerances) -> bool:
    if constraint.relation == "=":
        return abs(residual) <= tol.eq_for(constraint.provenance.statement_id)
    if constraint.relation == ">=":
        return residual >= -tol.ineq
    return residual > 0.0


def satisfied_batch(constraint: Constraint, X: np.ndarray, tolerances: Tolerances | None = None) -> np.ndarray:
    tol = tolerances or Tolerances()
    residual = constraint.lhs.evaluate_batch(X) - constraint.rhs
    if constraint.relation == "=":
        return np.abs(residual) <= tol.eq_for(constraint.provenance.statement_id)
    if constraint.relation == ">=":
        return residual >= -tol.ineq
    return residual > 0.0


# ---------------------------------------------------------------------------
# per-kind compilation

def compile_axioms(k: int) -> list[Constraint]:
    """The normalization equality and the k nonnegativity constraints."""
    out = [
        Constraint(
            Polynomial.linear(range(k)),
            "=",
            1.0,
            Provenance(None, ROLE_AXIOM, "sum of constituents = 1"),
        )
    ]
    for i in range(k):
        out.append(
            Constraint(
                Polynomial.linear([i]),
                ">=",
                0.0,
                Provenance(None, ROLE_AXIOM, f"x{i} >= 0"),
            )
        )
    return out


def _positivity(indices: np.ndarray, sid: str, label: str) -> Constraint:
    return Constraint(
        Polynomial.linear(indices),
        ">",
        0.0,
        Provenance(sid, ROLE_POSITIVITY, label),
    )


def _ev_text(network: Network, event: Event) -> str:
    order = {v.name: i for i, v in enumerate(network.variables)}
    lits = sorted(event.literals, key=lambda lv: order[lv[0]])
    return ", ".join(val for _, val in lits)


def compile_point_prior(stmt: Statement, network: Network, table) -> list[Constraint]:
    body = stmt.body
    idx = index_set(network, body.event)
    label = f"P({_ev_text(network, body.event)}) = {body.p}"
    return [Constraint(Polynomial.linear(idx), "=", body.p, Provenance(stmt.id, ROLE_MAIN, label))]


def compile_interval_prior(stmt: Statement, network: Network, table) -> list[Constraint]:
    body = stmt.body
    idx = index_set(network, body.event)
    ev = _ev_text(network, body.event)
    poly = Polynomial.linear(idx)
    return [
        Constraint(poly, ">=", body.lo, Provenance(stmt.id, ROLE_MAIN, f"P({ev}) >= {body.lo}")),
        Constraint(poly.scale(-1.0), ">=", -body.hi, Provenance(stmt.id, ROLE_MAIN, f"P({ev}) <= {body.hi}")),
    ]


def compile_point_conditional(stmt: Statement, network: Network, table) -> list[Constraint]:
    body = stmt.body
    num = Polynomial.linear(joint_indices(network, body.event1, body.event2))
    den_idx = index_set(network, body.event2)
    den = Polynomial.linear(den_idx)
    e1, e2 = _ev_text(network, body.event1), _ev_text(network, body.event2)
    main = Constraint(
        num - den.scale(body.p),
        "=",
        0.0,
        Provenance(stmt.id, ROLE_MAIN, f"P({e1} | {e2}) = {body.p}"),
    )
    return [main, _positivity(den_idx, stmt.id, f"P({e2}) > 0")]


def compile_interval_conditional(stmt: Statement, network: Network, table) -> list[Constraint]:
    body = stmt.body
    num = Polynomial.linear(joint_indices(network, body.event1, body.event2))
    den_idx = index_set(network, body.event2)
    den = Polynomial.linear(den_idx)
    e1, e2 = _ev_text(network, body.event1), _ev_text(network, body.event2)
    return [
        Constraint(
            num - den.scale(body.lo),
            ">=",
            0.0,
            Provenance(stmt.id, ROLE_MAIN, f"P({e1} | {e2}) >= {body.lo}"),
        ),
        Constraint(
            den.scale(body.hi) - num,
            ">=",
            0.0,
            Provenance(stmt.id, ROLE_MAIN, f"P({e1} | {e2}) <= {body.hi}"),
        ),
        _positivity(den_idx, stmt.id, f"P({e2}) > 0"),
    ]


def _term_polys(network: Network, term: ProbTerm) -> tuple[Polynomial, Polynomial | None, np.ndarray | None]:
    """(numerator-or-prior poly, denominator poly or None, denominator indices)."""
    if term.event2 is None:
        return Polynomial.linear(index_set(network, term.event1)), None, None
    num = Polynomial.linear(joint_indices(network, term.event1, term.event2))
    den_idx = index_set(network, term.event2)
    return num, Polynomial.linear(den_idx), den_idx


def compile_comparison(stmt: Statement, network: Network, table) -> list[Constraint]:
    body = stmt.body
    p1, d1, d1_idx = _term_polys(network, body.term1)
    p2, d2, d2_idx = _term_polys(network, body.term2)

    # cross-multiply by the (positive) denominators present
    left = p1.scale(body.a1)
    right = p2.scale(body.a2)
    if d2 is not None:
        left = left * d2
    if d1 is not None:
        right = right * d1

    rel = {"<": ">", "<=": ">=", "=": "=", ">=": ">=", ">": ">"}[body.relation]
    lhs = right - left if body.relation in ("<", "<=") else left - right

    def term_text(coef: float, term: ProbTerm) -> str:
        if term.event2 is None:
            text = f"P({_ev_text(network, term.event1)})"
        else:
            text = f"P({_ev_text(network, term.event1)} | {_ev_text(network, term.event2)})"
        return text if coef == 1.0 else f"{coef:g} * {text}"

    label = (
        f"{term_text(body.a1, body.term1)} {body.relation} {term_text(body.a2, body.term2)}"
    )
    out = [Constraint(lhs, rel, 0.0, Provenance(stmt.id, ROLE_MAIN, label))]
    if d1_idx is not None:
        out.append(_positivity(d1_idx, stmt.id, f"P({_ev_text(network, body.term1.event2)}) > 0"))
    if d2_idx is not None:
        out.append(_positivity(d2_idx, stmt.id, f"P({_ev_text(network, body.term2.event2)}) > 0"))
    return out


def _context_assignments(network: Network, names: Sequence[str]) -> Iterable[dict[str, tuple[int, ...]]]:
    """All value-position assignments over `names`, last name varying fastest."""
    ranges = [range(network.variable(n).k) for n in names]
    for combo in itertools.product(*ranges):
        yield {n: (p,) for n, p in zip(names, combo)}


def _context_text(network: Network, ctx: Mapping[str, tuple[int, ...]]) -> list[str]:
    return [network.variable(n).values[pos[0]] for n, pos in ctx.items()]


def compile_influence(stmt: Statement, network: Network, table) -> list[Constraint]:
    """S<sign>(V1, V0): Pr(V0 >= v0m | v1i, b) vs Pr(V0 >= v0m | v1j, b) for
    every threshold value v0m (lowest excluded), value pair v1i > v1j, and
    assignment b over V0's other direct predecessors."""
    body = stmt.body
    v0 = network.variable(body.target)
    v1 = network.variable(body.source)
    others = [p for p in network.parents(body.target) if p != body.source]
    out: list[Constraint] = []
    for m_pos in range(v0.k - 1):
        thr = tuple(range(m_pos + 1))
        thr_text = f"{v0.name}>={v0.values[m_pos]}"
        for i_pos, j_pos in itertools.combinations(range(v1.k), 2):
            for ctx in _context_assignments(network, others):
                ctx_text = _context_text(network, ctx)
                sides = []
                for pos in (i_pos, j_pos):
                    cond = {body.source: (pos,), **ctx}
                    den_idx = table.indices_where(cond)
                    num_idx = table.indices_where({body.target: thr, **cond})
                    cond_text = ", ".join([v1.values[pos]] + ctx_text)
                    sides.append((Polynomial.linear(num_idx), Polynomial.linear(den_idx), den_idx, cond_text))
                n1, d1, d1_idx, t1 = sides[0]
                n2, d2, d2_idx, t2 = sides[1]
                hi = n1 * d2
                lo = n2 * d1
                if body.sign == "0":
                    lhs, rel, op = hi - lo, "=", "="
                elif body.sign == "+":
                    lhs, rel, op = hi - lo, ">=", ">="
                else:
                    lhs, rel, op = lo - hi, ">=", "<="
                label = f"P({thr_text} | {t1}) {op} P({thr_text} | {t2})"
                out.append(Constraint(lhs, rel, 0.0, Provenance(stmt.id, ROLE_MAIN, label)))
                out.append(_positivity(d1_idx, stmt.id, f"P({t1}) > 0"))
                out.append(_positivity(d2_idx, stmt.id, f"P({t2}) > 0"))
    return out


def compile_additive_synergy(stmt: Statement, network: Network, table) -> list[Constraint]:
    """Y<sign>({V1, V2}, V0): the joint shift beats (or trails) the sum of the
    individual shifts. Clearing the four denominators yields a degree-4
    multilinear polynomial per inequality, plus four positivity constraints."""
    body = stmt.body
    va, vb = (network.variable(n) for n in body.pair)
    v0 = network.variable(body.target)
    others = [p for p in network.parents(body.target) if p not in body.pair]
    out: list[Constraint] = []
    for m_pos in range(v0.k - 1):
        thr = tuple(range(m_pos + 1))
        thr_text = f"{v0.name}>={v0.values[m_pos]}"
        for i_pos, j_pos in itertools.combinations(range(va.k), 2):
            for i2_pos, j2_pos in itertools.combinations(range(vb.k), 2):
                for ctx in _context_assignments(network, others):
                    ctx_text = _context_text(network, ctx)
                    combo = {}
                    for key, (pa, pb) in {
                        "ii": (i_pos, i2_pos),
                        "jj": (j_pos, j2_pos),
                        "ij": (i_pos, j2_pos),
                        "ji": (j_pos, i2_pos),
                    }.items():
                        cond = {va.name: (pa,), vb.name: (pb,), **ctx}
                        den_idx = table.indices_where(cond)
                        num_idx = table.indices_where({body.target: thr, **cond})
                        cond_text = ", ".join([va.values[pa], vb.values[pb]] + ctx_text)
                        combo[key] = (Polynomial.linear(num_idx), Polynomial.linear(den_idx), den_idx, cond_text)
                    n_ii, d_ii = combo["ii"][0], combo["ii"][1]
                    n_jj, d_jj = combo["jj"][0], combo["jj"][1]
                    n_ij, d_ij = combo["ij"][0], combo["ij"][1]
                    n_ji, d_ji = combo["ji"][0], combo["ji"][1]
                    joint = n_ii * d_jj * d_ij * d_ji + n_jj * d_ii * d_ij * d_ji
                    split = n_ij * d_ii * d_jj * d_ji + n_ji * d_ii * d_jj * d_ij
                    if body.sign == "0":
                        lhs, rel, op = joint - split, "=", "="
                    elif body.sign == "+":
                        lhs, rel, op = joint - split, ">=", ">="
                    else:
                        lhs, rel, op = split - joint, ">=", "<="
                    label = (
                        f"P({thr_text} | {combo['ii'][3]}) + P({thr_text} | {combo['jj'][3]})"
                        f" {op} P({thr_text} | {combo['ij'][3]}) + P({thr_text} | {combo['ji'][3]})"
                    )
                    out.append(Constraint(lhs, rel, 0.0, Provenance(stmt.id, ROLE_MAIN, label)))
                    for key in ("ii", "jj", "ij", "ji"):
                        out.append(_positivity(combo[key][2], stmt.id, f"P({combo[key][3]}) > 0"))
    return out


def compile_product_synergy(stmt: Statement, network: Network, table) -> list[Constraint]:
    """X<sign>({V1, V2}, v0m): intercausal influence between V1 and V2 given
    the observed effect value. One inequality per threshold value of V1
    (lowest excluded), value pair of V2, and context assignment; negative sign
    is the explaining-away direction."""
    body = stmt.body
    target_name = network.value_variable(body.effect_value)
    v0 = network.variable(target_name)
    effect_pos = v0.position(body.effect_value)
    v1 = network.variable(body.pair[0])
    v2 = network.variable(body.pair[1])
    others = [p for p in network.parents(target_name) if p not in body.pair]
    out: list[Constraint] = []
    for t_pos in range(v1.k - 1):
        thr = tuple(range(t_pos + 1))
        thr_text = f"{v1.name}>={v1.values[t_pos]}"
        for i2_pos, j2_pos in itertools.combinations(range(v2.k), 2):
            for ctx in _context_assignments(network, others):
                ctx_text = _context_text(network, ctx)
                sides = []
                for pos in (i2_pos, j2_pos):
                    cond = {v2.name: (pos,), target_name: (effect_pos,), **ctx}
                    den_idx = table.indices_where(cond)
                    num_idx = table.indices_where({v1.name: thr, **cond})
                    cond_text = ", ".join([v2.values[pos], body.effect_value] + ctx_text)
                    sides.append((Polynomial.linear(num_idx), Polynomial.linear(den_idx), den_idx, cond_text))
                n1, d1, d1_idx, t1 = sides[0]
                n2, d2, d2_idx, t2 = sides[1]
                hi = n1 * d2
                lo = n2 * d1
                if body.sign == "0":
                    lhs, rel, op = hi - lo, "=", "="
                elif body.sign == "+":
                    lhs, rel, op = hi - lo, ">=", ">="
                else:
                    lhs, rel, op = lo - hi, ">=", "<="
                label = f"P({thr_text} | {t1}) {op} P({thr_text} | {t2})"
                out.append(Constraint(lhs, rel, 0.0, Provenance(stmt.id, ROLE_MAIN, label)))
                out.append(_positivity(d1_idx, stmt.id, f"P({t1}) > 0"))
                out.append(_positivity(d2_idx, stmt.id, f"P({t2}) > 0"))
    return out


_COMPILERS = {
    PointPrior: compile_point_prior,
    IntervalPrior: compile_interval_prior,
    PointConditional: compile_point_conditional,
    IntervalConditional: compile_interval_conditional,
    Comparison: compile_comparison,
    Influence: compile_influence,
    AdditiveSynergy: compile_additive_synergy,
    ProductSynergy: compile_product_synergy,
}


def compile_statement(stmt: Statement, network: Network, table=None) -> list[Constraint]:
    table = table or network.table
    return _COMPILERS[type(stmt.body)](stmt, network, table)


def compile_system(statements: Sequence[Statement], network: Network) -> ConstraintSystem:
    """Axioms first, then per-statement constraints in statement order."""
    constraints = compile_axioms(network.k)
    for stmt in statements:
        constraints.extend(compile_statement(stmt, network))
    return ConstraintSystem(network.k, tuple(constraints), dedup_applied=False)


# ---------------------------------------------------------------------------
# normalization

def _is_tautology(c: Constraint) -> bool:
    if not c.lhs.is_zero:
        return False
    if c.relation == "=":
        return c.rhs == 0.0
    if c.relation == ">=":
        return c.rhs <= 0.0
    return c.rhs < 0.0


def _axiom_implied(c: Constraint) -> bool:
    """Linear inequalities already guaranteed by nonnegativity + normalization."""
    if c.provenance.role == ROLE_AXIOM or c.relation == "=":
        return False
    parts = c.lhs.linear_parts()
    if parts is None or not parts[0]:
        return False
    coefs, const = parts
    rhs = c.rhs - const
    values = list(coefs.values())
    if all(v >= 0.0 for v in values):
        # nonnegativity alone forces lhs >= 0
        return rhs < 0.0 if c.relation == ">" else rhs <= 0.0
    if all(v <= 0.0 for v in values):
        # over the simplex, sum(c_i x_i) >= min(c_i) when all c_i <= 0
        lo = min(values)
        return rhs < lo if c.relation == ">" else rhs <= lo
    return False


def normalize(system: ConstraintSystem) -> ConstraintSystem:
    """Deduplicate identical constraints, drop tautologies, flag redundancies.

    Contradictory constants (0 > 0, 0 = 0.5) are kept: they must surface in
    diagnosis instead of vanishing quietly. Idempotent.
    """
    kept: list[Constraint] = []
    by_key: dict[tuple, int] = {}
    for c in system.constraints:
        if _is_tautology(c):
            continue
        key = (c.lhs.terms, c.relation, c.rhs)
        if key in by_key:
            i = by_key[key]
            prev = kept[i]
            sid = c.provenance.statement_id
            if sid is not None and sid != prev.provenance.statement_id:
                merged = prev.provenance.merged_ids
                if sid not in merged:
                    kept[i] = replace(
                        prev,
                        provenance=replace(prev.provenance, merged_ids=merged + (sid,)),
                    )
            continue
        if not c.redundant and _axiom_implied(c):
            c = replace(c, redundant=True)
        by_key[key] = len(kept)
        kept.append(c)
    return ConstraintSystem(system.k, tuple(kept), dedup_applied=True)
