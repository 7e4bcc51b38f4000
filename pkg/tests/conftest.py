"""Shared fixtures: the four-variable clinical example network and helpers
for generating random networks used by the property tests."""

import itertools

import numpy as np
import pytest

from beliefbox.model import Network, Variable, build_network
from beliefbox.statements import parse_statements

# H = harm, N = treatment, I = infection, C = complication.  Declaration
# order fixes the constituent indexing: last variable varies fastest.
HIV_DSL = """\
var H : h > hbar
var N : n > nbar
var I : i > ibar
var C : c > cbar
edge N -> H
edge I -> H
edge C -> H
edge I -> C
"""

HIV_STATEMENTS = """\
P(i | c) = 1
P(i) > P(n)
P(h | n) > P(h | i)
0.1 <= P(n | h) <= 0.25
"""


@pytest.fixture(scope="session")
def hiv_network() -> Network:
    return parse_statements(HIV_DSL).network


@pytest.fixture(scope="session")
def hiv_parsed():
    return parse_statements(HIV_DSL + HIV_STATEMENTS)


def make_random_network(
    rng: np.random.Generator,
    n_vars: int | None = None,
    domain_sizes: tuple[int, ...] = (2, 3),
    max_parents: int = 3,
) -> Network:
    """Random DAG over variables v0..; edges only from earlier to later
    declarations, so acyclicity holds by construction."""
    if n_vars is None:
        n_vars = int(rng.integers(2, 6))
    variables = []
    for i in range(n_vars):
        size = int(rng.choice(domain_sizes))
        values = tuple(f"v{i}x{j}" for j in range(size))
        variables.append(Variable(f"v{i}", values))
    edges = []
    for child in range(1, n_vars):
        pool = list(range(child))
        rng.shuffle(pool)
        n_par = int(rng.integers(0, min(max_parents, child) + 1))
        for parent in sorted(pool[:n_par]):
            edges.append((f"v{parent}", f"v{child}"))
    return build_network(variables, edges)


def enumerate_assignments(network: Network):
    """All full assignments in constituent-index order (independent of
    ConstituentTable: plain product over value positions, last fastest)."""
    sizes = [len(v.values) for v in network.variables]
    return itertools.product(*(range(s) for s in sizes))


# One verdict line per acceptance criterion, echoed after the run so the
# lines survive output capture.
ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
