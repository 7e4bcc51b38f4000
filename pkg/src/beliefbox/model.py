"""Belief network structure and constituent-level probability evaluation.

A network over discrete variables V1..Vn induces a joint distribution that we
coordinatize by its constituent probabilities: one coordinate per full
assignment of values to all variables. Every event probability is then a sum
of constituent coordinates, which is what makes the rest of the engine
(polynomial compilation, LP bounds, simplex sampling) possible.

Indexing convention, fixed once here and relied on everywhere else:
constituents are numbered 0..k-1 in mixed radix over the variables in
declaration order, with the last declared variable varying fastest. Within a
variable, value position 0 is the highest (first declared) value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Hard cap on joint size; beyond this the dense coordinate vector itself is
# the problem, not any particular algorithm.
DEFAULT_MAX_K = 2 ** 20

IDENT_CHARS = "identifier: letter or underscore, then letters, digits, underscores"


class NetworkError(ValueError):
    """Structurally invalid network or event reference."""


class UndefinedConditional(ArithmeticError):
    """Conditional probability with Pr(condition) = 0 at the given point."""


def _check_ident(name: str, what: str) -> None:
    if not name or not (name[0].isalpha() or name[0] == "_"):
        raise NetworkError(f"bad {what} {name!r} ({IDENT_CHARS})")
    if not all(c.isalnum() or c == "_" for c in name):
        raise NetworkError(f"bad {what} {name!r} ({IDENT_CHARS})")


@dataclass(frozen=True)
class Variable:
    """A discrete variable; values are listed from highest to lowest."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_ident(self.name, "variable name")
        if len(self.values) < 2:
            raise NetworkError(f"variable {self.name!r} needs at least two values")
        if len(set(self.values)) != len(self.values):
            raise NetworkError(f"variable {self.name!r} repeats a value")
        for v in self.values:
            _check_ident(v, "value name")

    @property
    def k(self) -> int:
        return len(self.values)

    def position(self, value: str) -> int:
        """Rank of a value, 0 = highest."""
        try:
            return self.values.index(value)
        except ValueError:
            raise NetworkError(f"variable {self.name!r} has no value {value!r}") from None

    @property
    def is_binary(self) -> bool:
        return len(self.values) == 2


@dataclass(frozen=True)
class Event:
    """Conjunction of value assignments, at most one per variable.

    The empty event is the sure event. Variable names in the literals must be
    distinct; a contradictory conjunction therefore cannot be represented as
    an Event and is signalled by joint_indices returning an empty index set.
    """

    literals: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        names = [var for var, _ in self.literals]
        if len(set(names)) != len(names):
            raise NetworkError("event assigns the same variable twice")

    @classmethod
    def of(cls, mapping: Mapping[str, str] | None = None, **kw: str) -> "Event":
        lits = dict(mapping or {})
        lits.update(kw)
        return cls(frozenset(lits.items()))

    def as_dict(self) -> dict[str, str]:
        return dict(self.literals)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(var for var, _ in self.literals)

    @property
    def is_sure(self) -> bool:
        return not self.literals


class ConstituentTable:
    """Mixed-radix numbering of full assignments.

    Strides follow declaration order with the last variable varying fastest,
    so for sizes (k1, .., kn) the stride of Vi is k_{i+1} * .. * kn.
    """

    def __init__(self, variables: Sequence[Variable]):
        self.variables = tuple(variables)
        sizes = [v.k for v in self.variables]
        strides = []
        acc = 1
        for s in reversed(sizes):
            strides.append(acc)
            acc *= s
        strides.reverse()
        self.sizes = tuple(sizes)
        self.strides = tuple(strides)
        self.k = acc
        self._pos = {v.name: i for i, v in enumerate(self.variables)}

    def stride(self, name: str) -> int:
        return self.strides[self._pos[name]]

    def index_of(self, positions: Sequence[int]) -> int:
        """Constituent index of a full assignment given as value positions."""
        if len(positions) != len(self.variables):
            raise NetworkError("assignment length does not match variable count")
        return int(sum(p * s for p, s in zip(positions, self.strides)))

    def digits(self, index: int) -> tuple[int, ...]:
        """Value positions of constituent `index`, in declaration order."""
        out = []
        for size, stride in zip(self.sizes, self.strides):
            out.append((index // stride) % size)
        return tuple(out)

    def indices_where(self, allowed: Mapping[str, Sequence[int]]) -> np.ndarray:
        """All constituent indices whose digits fall in the allowed sets.

        Variables absent from `allowed` are unconstrained. The result is
        sorted ascending when each allowed sequence is ascending.
        """
        idx = np.zeros(1, dtype=np.int64)
        for var, stride in zip(self.variables, self.strides):
            positions = allowed.get(var.name)
            if positions is None:
                positions = range(var.k)
            offs = np.asarray(list(positions), dtype=np.int64) * stride
            idx = (idx[:, None] + offs[None, :]).ravel()
        return idx


class Network:
    """Directed acyclic graph over variables.

    Immutable after construction. Declaration order of the variables fixes
    the constituent numbering, so it is part of the identity of the network.
    """

    def __init__(
        self,
        variables: Sequence[Variable],
        edges: Iterable[tuple[str, str]] = (),
        max_k: int = DEFAULT_MAX_K,
    ):
        self.variables = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise NetworkError("duplicate variable name")
        self._by_name = {v.name: v for v in self.variables}

        # Value identifiers are global: a bare value in the statement language
        # must resolve to exactly one variable.
        owner: dict[str, str] = {}
        for v in self.variables:
            for val in v.values:
                if val in owner:
                    raise NetworkError(
                        f"value {val!r} declared by both {owner[val]!r} and {v.name!r}"
                    )
                owner[val] = v.name
        self.value_owner = owner

        edge_list = []
        seen = set()
        for a, b in edges:
            if a not in self._by_name or b not in self._by_name:
                missing = a if a not in self._by_name else b
                raise NetworkError(f"edge endpoint {missing!r} is not a declared variable")
            if a == b:
                raise NetworkError(f"self-loop on {a!r}")
            if (a, b) in seen:
                raise NetworkError(f"duplicate edge {a!r} -> {b!r}")
            seen.add((a, b))
            edge_list.append((a, b))
        self.edges = tuple(edge_list)

        self._parents: dict[str, list[str]] = {n: [] for n in names}
        self._children: dict[str, list[str]] = {n: [] for n in names}
        for a, b in self.edges:
            self._parents[b].append(a)
            self._children[a].append(b)
        # keep declaration order, not edge order
        order = {n: i for i, n in enumerate(names)}
        for d in (self._parents, self._children):
            for n in d:
                d[n].sort(key=order.__getitem__)

        self._check_acyclic(names)

        k = 1
        for v in self.variables:
            k *= v.k
            if k > max_k:
                raise NetworkError(
                    f"joint has more than {max_k} constituents; refusing to enumerate"
                )
        self.table = ConstituentTable(self.variables)

    def _check_acyclic(self, names: list[str]) -> None:
        indeg = {n: len(self._parents[n]) for n in names}
        queue = [n for n in names if indeg[n] == 0]
        topo = []
        while queue:
            n = queue.pop()
            topo.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(topo) != len(names):
            cyclic = sorted(n for n in names if indeg[n] > 0)
            raise NetworkError(f"edges form a cycle through {', '.join(cyclic)}")

    @property
    def k(self) -> int:
        return self.table.k

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise NetworkError(f"unknown variable {name!r}") from None

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    def parents(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return tuple(self._parents[name])

    def children(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return tuple(self._children[name])

    def value_variable(self, value: str) -> str:
        """Variable owning a (globally unique) value identifier."""
        try:
            return self.value_owner[value]
        except KeyError:
            raise NetworkError(f"unknown value {value!r}") from None


def build_network(
    variables: Sequence[Variable],
    edges: Iterable[tuple[str, str]] = (),
    max_k: int = DEFAULT_MAX_K,
) -> Network:
    return Network(variables, edges, max_k=max_k)


def _event_allowed(network: Network, event: Event) -> dict[str, Sequence[int]]:
    allowed: dict[str, Sequence[int]] = {}
    for var, val in event.literals:
        v = network.variable(var)
        allowed[var] = (v.position(val),)
    return allowed


def index_set(network: Network, event: Event) -> np.ndarray:
    """Sorted constituent indices whose disjunction is the event."""
    return network.table.indices_where(_event_allowed(network, event))


def joint_indices(network: Network, event1: Event, event2: Event) -> np.ndarray:
    """Index set of the conjunction; empty if the events contradict."""
    d1, d2 = event1.as_dict(), event2.as_dict()
    for var, val in d2.items():
        if var in d1 and d1[var] != val:
            return np.empty(0, dtype=np.int64)
    d1.update(d2)
    return index_set(network, Event.of(d1))


def _check_point(network: Network, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (network.k,):
        raise NetworkError(
            f"point has shape {x.shape}, expected ({network.k},) for this network"
        )
    return x


def evaluate_prior(network: Network, x: np.ndarray, event: Event) -> float:
    """Pr(event) at the point x: the sum of the event's constituents."""
    x = _check_point(network, x)
    return float(x[index_set(network, event)].sum())


def evaluate_conditional(network: Network, x: np.ndarray, event1: Event, event2: Event) -> float:
    """Pr(event1 | event2) at x, raising UndefinedConditional when Pr(event2) = 0."""
    x = _check_point(network, x)
    den = float(x[index_set(network, event2)].sum())
    if den == 0.0:
        raise UndefinedConditional("conditioning event has probability zero at this point")
    num = float(x[joint_indices(network, event1, event2)].sum())
    return num / den
