"""Statement vocabulary and the line-oriented elicitation language.

One file carries both the network declaration and the expert's statements, so
a session is self-contained and diffable:

    var H : h > hbar          # values high to low
    edge N -> H
    P(h) = 0.005
    0.1 <= P(n | h) <= 0.25
    P(i) > P(n)
    S+(N, H)
    Y-({I, C}, H)
    X-({N, I}, h)

Literals are value identifiers joined by commas; `~v` negates the value of a
binary variable. Value identifiers are globally unique, so a literal alone
determines its variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .model import Event, Network, NetworkError, Variable


class ParseError(ValueError):
    """Syntax or reference error in the statement language."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        col = f":{self.column}" if self.column else ""
        return f"line {self.line}{col}: {self.message}"


@dataclass(frozen=True)
class ProbTerm:
    """A probability expression: Pr(event1) or Pr(event1 | event2)."""

    event1: Event
    event2: Event | None = None

    @property
    def is_conditional(self) -> bool:
        return self.event2 is not None


@dataclass(frozen=True)
class PointPrior:
    event: Event
    p: float


@dataclass(frozen=True)
class PointConditional:
    event1: Event
    event2: Event
    p: float


@dataclass(frozen=True)
class IntervalPrior:
    event: Event
    lo: float
    hi: float


@dataclass(frozen=True)
class IntervalConditional:
    event1: Event
    event2: Event
    lo: float
    hi: float


@dataclass(frozen=True)
class Comparison:
    """a1 * term1  <relation>  a2 * term2, relation in < <= = >= >."""

    a1: float
    term1: ProbTerm
    relation: str
    a2: float
    term2: ProbTerm


@dataclass(frozen=True)
class Influence:
    """S<sign>(source, target): source shifts target's distribution monotonically."""

    sign: str
    source: str
    target: str


@dataclass(frozen=True)
class AdditiveSynergy:
    """Y<sign>({pair}, target): joint influence vs the sum of individual ones."""

    sign: str
    pair: tuple[str, str]
    target: str


@dataclass(frozen=True)
class ProductSynergy:
    """X<sign>({pair}, effect_value): intercausal sign given an observed effect."""

    sign: str
    pair: tuple[str, str]
    effect_value: str


Body = Union[
    PointPrior,
    PointConditional,
    IntervalPrior,
    IntervalConditional,
    Comparison,
    Influence,
    AdditiveSynergy,
    ProductSynergy,
]

_KIND_BY_TYPE = {
    PointPrior: "point-prior",
    PointConditional: "point-conditional",
    IntervalPrior: "interval-prior",
    IntervalConditional: "interval-conditional",
    Comparison: "comparison",
    Influence: "influence",
    AdditiveSynergy: "additive-synergy",
    ProductSynergy: "product-synergy",
}

# Robustness tiers, most robust first (lowest number). Qualitative signs
# survive expert revision better than any number; point priors are the most
# fragile. The tie within a tier is broken by statement order elsewhere.
ROBUSTNESS_TIER = {
    "influence": 0,
    "additive-synergy": 0,
    "product-synergy": 0,
    "comparison": 1,
    "interval-prior": 2,
    "interval-conditional": 2,
    "point-conditional": 3,
    "point-prior": 4,
}

ROBUSTNESS_LABEL = {0: "qualitative", 1: "comparison", 2: "interval", 3: "point-conditional", 4: "point-prior"}


@dataclass(frozen=True)
class Statement:
    """A parsed statement with a stable id and source-line provenance."""

    id: str
    body: Body
    line: int | None = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return _KIND_BY_TYPE[type(self.body)]

    @property
    def robustness_tier(self) -> int:
        return ROBUSTNESS_TIER[self.kind]

    @property
    def robustness_class(self) -> str:
        return ROBUSTNESS_LABEL[self.robustness_tier]


@dataclass(frozen=True)
class Finding:
    """Structural validation result; never blocks compilation by itself."""

    severity: str
    code: str
    message: str
    statement_id: str | None = None


@dataclass
class ParseResult:
    network: Network
    statements: list[Statement]


_NUM = r"(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?"
_PROB = r"P\(\s*([^()|]+?)\s*(?:\|\s*([^()|]+?)\s*)?\)"

_VAR_LINE = re.compile(r"^var\s+(\w+)\s*:\s*(.+)$")
_EDGE_LINE = re.compile(r"^edge\s+(\w+)\s*->\s*(\w+)$")
_S_LINE = re.compile(r"^S([+\-0])\s*\(\s*(\w+)\s*,\s*(\w+)\s*\)$")
_Y_LINE = re.compile(r"^Y([+\-0])\s*\(\s*\{\s*(\w+)\s*,\s*(\w+)\s*\}\s*,\s*(\w+)\s*\)$")
_X_LINE = re.compile(r"^X([+\-0])\s*\(\s*\{\s*(\w+)\s*,\s*(\w+)\s*\}\s*,\s*(~?\w+)\s*\)$")
_POINT_LINE = re.compile(rf"^{_PROB}\s*=\s*({_NUM})$")
_INTERVAL_LINE = re.compile(rf"^({_NUM})\s*<=\s*{_PROB}\s*<=\s*({_NUM})$")
_COMPARE_LINE = re.compile(
    rf"^(?:({_NUM})\s*\*\s*)?{_PROB}\s*(<=|>=|<|>|=)\s*(?:({_NUM})\s*\*\s*)?{_PROB}$"
)
_QUERY = re.compile(rf"^{_PROB}$")


def _column_of(line_text: str, token: str) -> int | None:
    pos = line_text.find(token)
    return pos + 1 if pos >= 0 else None


def _parse_literal(token: str, network: Network, lineno: int | None, line_text: str) -> tuple[str, str]:
    """Resolve one literal token to (variable, value)."""
    token = token.strip()
    col = _column_of(line_text, token)
    negated = token.startswith("~")
    value = token[1:].strip() if negated else token
    if not value:
        raise ParseError("empty literal", lineno, col)
    try:
        var_name = network.value_variable(value)
    except NetworkError as exc:
        raise ParseError(str(exc), lineno, col) from None
    if negated:
        var = network.variable(var_name)
        if not var.is_binary:
            raise ParseError(
                f"negation `~{value}` needs a binary variable; {var_name!r} has {var.k} values",
                lineno,
                col,
            )
        value = var.values[1] if var.values[0] == value else var.values[0]
    return var_name, value


def _parse_event(text: str, network: Network, lineno: int | None, line_text: str) -> Event:
    assignments: dict[str, str] = {}
    for token in text.split(","):
        var_name, value = _parse_literal(token, network, lineno, line_text)
        if var_name in assignments and assignments[var_name] != value:
            raise ParseError(
                f"event assigns two values to {var_name!r}", lineno, _column_of(line_text, token.strip())
            )
        assignments[var_name] = value
    return Event.of(assignments)


def _parse_prob(ev1: str, ev2: str | None, network: Network, lineno: int | None, line_text: str) -> ProbTerm:
    event1 = _parse_event(ev1, network, lineno, line_text)
    event2 = _parse_event(ev2, network, lineno, line_text) if ev2 is not None else None
    return ProbTerm(event1, event2)


def _parse_probability(token: str, lineno: int | None, line_text: str, what: str = "probability") -> float:
    p = float(token)
    if not 0.0 <= p <= 1.0:
        raise ParseError(f"{what} {token} outside [0, 1]", lineno, _column_of(line_text, token))
    return p


def _variable_ref(name: str, network: Network, lineno: int, line_text: str) -> str:
    if not network.has_variable(name):
        raise ParseError(f"unknown variable {name!r}", lineno, _column_of(line_text, name))
    return name


def _strip_comment(raw: str) -> str:
    if "#" in raw:
        raw = raw[: raw.index("#")]
    return raw.strip()


def parse_statements(text: str) -> ParseResult:
    """Parse a statements file into a network plus ordered statements.

    Two passes: declarations first (statements may reference a variable
    declared on a later line), then the statement lines proper.
    """
    lines = text.splitlines()
    var_decls: list[tuple[int, str, str]] = []
    edge_decls: list[tuple[int, str, str]] = []
    stmt_lines: list[tuple[int, str]] = []

    for lineno, raw in enumerate(lines, start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("var"):
            m = _VAR_LINE.match(line)
            if not m:
                raise ParseError("malformed var declaration", lineno, 1)
            var_decls.append((lineno, m.group(1), m.group(2)))
        elif line.startswith("edge"):
            m = _EDGE_LINE.match(line)
            if not m:
                raise ParseError("malformed edge declaration", lineno, 1)
            edge_decls.append((lineno, m.group(1), m.group(2)))
        else:
            stmt_lines.append((lineno, line))

    if not var_decls:
        raise ParseError("no variables declared", 1, 1)

    variables = []
    seen_vars: dict[str, int] = {}
    seen_values: dict[str, str] = {}
    for lineno, name, values_text in var_decls:
        if name in seen_vars:
            raise ParseError(f"variable {name!r} already declared on line {seen_vars[name]}", lineno)
        seen_vars[name] = lineno
        values = tuple(v.strip() for v in values_text.split(">"))
        if any(not v for v in values) or len(values) < 2:
            raise ParseError(f"variable {name!r} needs two or more `>`-separated values", lineno)
        for v in values:
            if v in seen_values:
                raise ParseError(
                    f"value {v!r} already declared by variable {seen_values[v]!r}", lineno
                )
            seen_values[v] = name
        try:
            variables.append(Variable(name, values))
        except NetworkError as exc:
            raise ParseError(str(exc), lineno) from None

    edges = []
    for lineno, a, b in edge_decls:
        for endpoint in (a, b):
            if endpoint not in seen_vars:
                raise ParseError(f"edge endpoint {endpoint!r} is not a declared variable", lineno)
        edges.append((a, b))

    try:
        network = Network(variables, edges)
    except NetworkError as exc:
        # structural error not caught above (cycle, duplicate edge): report at
        # the last edge line, the best single location we have
        last_line = edge_decls[-1][0] if edge_decls else var_decls[-1][0]
        raise ParseError(str(exc), last_line) from None

    statements = []
    for n, (lineno, line) in enumerate(stmt_lines, start=1):
        body = _parse_statement_line(line, network, lineno)
        statements.append(Statement(id=f"s{n}", body=body, line=lineno))
    return ParseResult(network, statements)


def _parse_statement_line(line: str, network: Network, lineno: int | None) -> Body:
    m = _S_LINE.match(line)
    if m:
        sign, source, target = m.groups()
        _variable_ref(source, network, lineno, line)
        _variable_ref(target, network, lineno, line)
        return Influence(sign, source, target)
    m = _Y_LINE.match(line)
    if m:
        sign, v1, v2, target = m.groups()
        _variable_ref(v1, network, lineno, line)
        _variable_ref(v2, network, lineno, line)
        _variable_ref(target, network, lineno, line)
        return AdditiveSynergy(sign, (v1, v2), target)
    m = _X_LINE.match(line)
    if m:
        sign, v1, v2, effect = m.groups()
        _variable_ref(v1, network, lineno, line)
        _variable_ref(v2, network, lineno, line)
        _, effect_value = _parse_literal(effect, network, lineno, line)
        return ProductSynergy(sign, (v1, v2), effect_value)

    m = _INTERVAL_LINE.match(line)
    if m:
        lo_tok, ev1, ev2, hi_tok = m.groups()
        lo = _parse_probability(lo_tok, lineno, line, "lower bound")
        hi = _parse_probability(hi_tok, lineno, line, "upper bound")
        if not lo < hi:
            raise ParseError(f"interval needs lower < upper, got [{lo_tok}, {hi_tok}]", lineno)
        term = _parse_prob(ev1, ev2, network, lineno, line)
        if term.is_conditional:
            return IntervalConditional(term.event1, term.event2, lo, hi)
        return IntervalPrior(term.event1, lo, hi)

    m = _POINT_LINE.match(line)
    if m:
        ev1, ev2, p_tok = m.groups()
        p = _parse_probability(p_tok, lineno, line)
        term = _parse_prob(ev1, ev2, network, lineno, line)
        if term.is_conditional:
            return PointConditional(term.event1, term.event2, p)
        return PointPrior(term.event1, p)

    m = _COMPARE_LINE.match(line)
    if m:
        a1_tok, e1a, e1b, rel, a2_tok, e2a, e2b = m.groups()
        a1 = float(a1_tok) if a1_tok else 1.0
        a2 = float(a2_tok) if a2_tok else 1.0
        term1 = _parse_prob(e1a, e1b, network, lineno, line)
        term2 = _parse_prob(e2a, e2b, network, lineno, line)
        return Comparison(a1, term1, rel, a2, term2)

    raise ParseError(f"cannot parse statement: {line}", lineno, 1)


def parse_statement_line(line: str, network: Network, lineno: int | None = None) -> Body:
    """Parse a single statement line against an existing network."""
    stripped = _strip_comment(line)
    if not stripped:
        raise ParseError("empty statement", lineno, 1)
    if stripped.startswith(("var ", "edge ")):
        raise ParseError("declarations are fixed once the session exists", lineno, 1)
    return _parse_statement_line(stripped, network, lineno)


def parse_query(text: str, network: Network) -> ProbTerm:
    """Parse a query of the form P(lits) or P(lits | lits)."""
    m = _QUERY.match(text.strip())
    if not m:
        raise ParseError(f"cannot parse query: {text}")
    return _parse_prob(m.group(1), m.group(2), network, None, text)


# ---------------------------------------------------------------------------
# formatting (the inverse of parsing; parse(format(x)) == x)

def _format_literal(network: Network, var_name: str, value: str) -> str:
    var = network.variable(var_name)
    if var.is_binary and var.position(value) == 1:
        return f"~{var.values[0]}"
    return value


def _format_event(network: Network, event: Event) -> str:
    order = {v.name: i for i, v in enumerate(network.variables)}
    lits = sorted(event.literals, key=lambda lv: order[lv[0]])
    return ", ".join(_format_literal(network, var, val) for var, val in lits)


def _format_num(x: float) -> str:
    return repr(float(x))


def format_prob(network: Network, term: ProbTerm) -> str:
    if term.event2 is None:
        return f"P({_format_event(network, term.event1)})"
    return f"P({_format_event(network, term.event1)} | {_format_event(network, term.event2)})"


def format_statement(stmt: Statement | Body, network: Network) -> str:
    body = stmt.body if isinstance(stmt, Statement) else stmt
    if isinstance(body, PointPrior):
        return f"P({_format_event(network, body.event)}) = {_format_num(body.p)}"
    if isinstance(body, PointConditional):
        term = ProbTerm(body.event1, body.event2)
        return f"{format_prob(network, term)} = {_format_num(body.p)}"
    if isinstance(body, IntervalPrior):
        return (
            f"{_format_num(body.lo)} <= P({_format_event(network, body.event)})"
            f" <= {_format_num(body.hi)}"
        )
    if isinstance(body, IntervalConditional):
        term = ProbTerm(body.event1, body.event2)
        return f"{_format_num(body.lo)} <= {format_prob(network, term)} <= {_format_num(body.hi)}"
    if isinstance(body, Comparison):
        left = format_prob(network, body.term1)
        right = format_prob(network, body.term2)
        if body.a1 != 1.0:
            left = f"{_format_num(body.a1)} * {left}"
        if body.a2 != 1.0:
            right = f"{_format_num(body.a2)} * {right}"
        return f"{left} {body.relation} {right}"
    if isinstance(body, Influence):
        return f"S{body.sign}({body.source}, {body.target})"
    if isinstance(body, AdditiveSynergy):
        return f"Y{body.sign}({{{body.pair[0]}, {body.pair[1]}}}, {body.target})"
    if isinstance(body, ProductSynergy):
        var_name = network.value_variable(body.effect_value)
        lit = _format_literal(network, var_name, body.effect_value)
        return f"X{body.sign}({{{body.pair[0]}, {body.pair[1]}}}, {lit})"
    raise TypeError(f"not a statement body: {body!r}")


def format_network(network: Network) -> str:
    lines = [f"var {v.name} : {' > '.join(v.values)}" for v in network.variables]
    lines += [f"edge {a} -> {b}" for a, b in network.edges]
    return "\n".join(lines)


def format_file(network: Network, statements: Iterable[Statement]) -> str:
    lines = [format_network(network)]
    lines += [format_statement(s, network) for s in statements]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structural validation

def _conditional_events(body: Body) -> list[tuple[Event, Event]]:
    if isinstance(body, (PointConditional, IntervalConditional)):
        return [(body.event1, body.event2)]
    if isinstance(body, Comparison):
        return [
            (t.event1, t.event2)
            for t in (body.term1, body.term2)
            if t.event2 is not None
        ]
    return []


def validate(statements: list[Statement], network: Network) -> list[Finding]:
    """Structural findings: bad influence targets, overlapping conditional
    events, duplicates. No probabilistic reasoning happens here."""
    findings: list[Finding] = []

    def warn(code: str, message: str, sid: str) -> None:
        findings.append(Finding("warning", code, message, sid))

    seen_bodies: dict[Body, str] = {}
    for stmt in statements:
        body = stmt.body
        if body in seen_bodies:
            warn(
                "duplicate-statement",
                f"statement repeats {seen_bodies[body]}",
                stmt.id,
            )
        else:
            seen_bodies[body] = stmt.id

        if isinstance(body, Influence):
            if body.source == body.target:
                warn("self-influence", f"{body.source!r} cannot influence itself", stmt.id)
            elif body.source not in network.parents(body.target):
                warn(
                    "not-a-predecessor",
                    f"{body.source!r} is not a direct predecessor of {body.target!r}",
                    stmt.id,
                )
        elif isinstance(body, AdditiveSynergy):
            if body.pair[0] == body.pair[1]:
                warn("pair-not-distinct", "synergy pair names the same variable twice", stmt.id)
            for v in body.pair:
                if v != body.target and v not in network.parents(body.target):
                    warn(
                        "not-a-predecessor",
                        f"{v!r} is not a direct predecessor of {body.target!r}",
                        stmt.id,
                    )
                if v == body.target:
                    warn("self-influence", f"{v!r} cannot be its own cause", stmt.id)
        elif isinstance(body, ProductSynergy):
            target = network.value_variable(body.effect_value)
            if body.pair[0] == body.pair[1]:
                warn("pair-not-distinct", "synergy pair names the same variable twice", stmt.id)
            for v in body.pair:
                if v == target:
                    warn("self-influence", f"{v!r} cannot be its own cause", stmt.id)
                elif v not in network.parents(target):
                    warn(
                        "not-a-predecessor",
                        f"{v!r} is not a direct predecessor of {target!r}",
                        stmt.id,
                    )

        for e1, e2 in _conditional_events(body):
            shared = e1.variables & e2.variables
            if shared:
                warn(
                    "overlapping-events",
                    "conditional events share variable(s) " + ", ".join(sorted(shared)),
                    stmt.id,
                )
    return findings
