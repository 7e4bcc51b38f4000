"""LP preprocessing: per-constituent bounds and strict-inequality probes.

Soundness is the contract (every feasible point lies inside the box);
tightness is not promised when nonlinear constraints are dropped.
"""

import numpy as np
import pytest

from beliefbox.bounds import (
    BoundsBox,
    extract_linear,
    preprocess,
    probe_strict,
    solve_bounds,
)
from beliefbox.canonical import compile_system
from beliefbox.statements import Statement, parse_statement_line

from conftest import make_random_network


def stmts(network, *lines):
    return [
        Statement(f"s{i + 1}", parse_statement_line(line, network))
        for i, line in enumerate(lines)
    ]


class TestExtractLinear:
    def test_axioms_are_linear(self, hiv_network):
        system = compile_system([], hiv_network)
        sub = extract_linear(system)
        assert len(sub.closed) == 17
        assert sub.strict == []

    def test_strict_closure_also_kept_closed(self, hiv_network):
        system = compile_system(stmts(hiv_network, "P(i) > P(n)"), hiv_network)
        sub = extract_linear(system)
        assert len(sub.strict) == 1
        # the strict constraint contributes its closure to the closed set
        assert len(sub.closed) == 18

    def test_quadratics_are_dropped(self, hiv_network):
        system = compile_system(stmts(hiv_network, "P(h | n) > P(h | i)"), hiv_network)
        sub = extract_linear(system)
        # the cross-multiplied main is degree 2; only the two linear
        # denominator-positivity constraints survive
        assert len(sub.strict) == 2


class TestSolveBounds:
    def test_axioms_only_box_is_unit(self, hiv_network):
        system = compile_system([], hiv_network)
        box = solve_bounds(extract_linear(system), 16)
        assert np.allclose(box.lo, 0.0, atol=1e-9)
        assert np.allclose(box.hi, 1.0, atol=1e-9)

    def test_point_prior_caps_block(self, hiv_network):
        system = compile_system(stmts(hiv_network, "P(h) = 0.005"), hiv_network)
        box = solve_bounds(extract_linear(system), 16)
        assert np.allclose(box.hi[:8], 0.005, atol=1e-9)
        assert np.allclose(box.lo[:8], 0.0, atol=1e-9)
        assert np.allclose(box.hi[8:], 0.995, atol=1e-9)

    def test_contradiction_returns_none(self, hiv_network):
        system = compile_system(
            stmts(hiv_network, "P(h) = 0.2", "P(h) = 0.3"), hiv_network
        )
        assert solve_bounds(extract_linear(system), 16) is None

    def test_interval_bounds_are_exact_on_small_net(self):
        net = make_random_network(np.random.default_rng(0), n_vars=2, domain_sizes=(2,))
        v = net.variables[0]
        system = compile_system(
            stmts(net, f"0.2 <= P({v.values[0]}) <= 0.4"), net
        )
        box = solve_bounds(extract_linear(system), net.k)
        block = [0, 1]  # first variable spans the first half
        total_hi = box.hi[block].sum()
        assert total_hi >= 0.4 - 1e-9
        assert all(box.hi[i] <= 0.4 + 1e-9 for i in block)


class TestProbeStrict:
    def test_satisfiable_strict_passes(self, hiv_network):
        system = compile_system(stmts(hiv_network, "P(i) > P(n)"), hiv_network)
        sub = extract_linear(system)
        assert probe_strict(sub.strict, sub.closed, 16) == []

    def test_strict_forced_to_equality_is_violated(self, hiv_network):
        system = compile_system(
            stmts(hiv_network, "P(i) > P(n)", "P(i) = 0.5", "P(n) = 0.5"), hiv_network
        )
        sub = extract_linear(system)
        violated = probe_strict(sub.strict, sub.closed, 16)
        assert len(violated) == 1
        assert violated[0].provenance.label == "P(i) > P(n)"


class TestPreprocess:
    def test_feasible_clinical_set(self, hiv_parsed):
        system = compile_system(hiv_parsed.statements, hiv_parsed.network)
        result = preprocess(system)
        assert result.feasible
        assert result.box is not None
        assert result.violated_strict == []

    def test_infeasible_flags(self, hiv_network):
        system = compile_system(
            stmts(hiv_network, "P(h) = 0.2", "P(h) = 0.3"), hiv_network
        )
        result = preprocess(system)
        assert not result.feasible
        assert result.box is None

    def test_strict_violation_flags(self, hiv_network):
        system = compile_system(
            stmts(hiv_network, "P(i) > P(n)", "P(i) = 0.5", "P(n) = 0.5"), hiv_network
        )
        result = preprocess(system)
        assert not result.feasible
        assert result.box is not None

    def test_box_is_sound_for_random_feasible_points(self, hiv_network):
        # soundness oracle: any point satisfying the closed linear subset
        # must lie inside the box (inequalities only, so random hits exist)
        system = compile_system(
            stmts(hiv_network, "0.2 <= P(h) <= 0.8", "P(i) > P(n)"), hiv_network
        )
        result = preprocess(system)
        rng = np.random.default_rng(5)
        sub = extract_linear(system)
        found = 0
        for x in rng.dirichlet(np.ones(16), size=4000):
            ok = True
            for c in sub.closed:
                coefs, const = c.lhs.linear_parts()
                val = sum(v * x[i] for i, v in coefs.items()) + const
                if c.relation == "=" and abs(val - c.rhs) > 1e-9:
                    ok = False
                elif c.relation in (">=", ">") and val < c.rhs - 1e-9:
                    ok = False
                if not ok:
                    break
            if ok:
                found += 1
                assert result.box.contains(x)
        assert found > 100

    def test_adding_constraints_never_widens(self, hiv_network):
        rng = np.random.default_rng(17)
        base_lines = ["0.2 <= P(h) <= 0.8"]
        system = compile_system(stmts(hiv_network, *base_lines), hiv_network)
        prev = preprocess(system).box
        lines = base_lines + ["0.3 <= P(i) <= 0.6", "P(n) = 0.4", "P(h) <= P(i)"]
        for upto in range(2, len(lines) + 1):
            system = compile_system(stmts(hiv_network, *lines[:upto]), hiv_network)
            box = preprocess(system).box
            assert box is not None
            assert np.all(box.lo >= prev.lo - 1e-9)
            assert np.all(box.hi <= prev.hi + 1e-9)
            prev = box


class TestBoundsBox:
    def test_contains_respects_margin(self):
        box = BoundsBox(lo=np.zeros(2), hi=np.array([0.5, 1.0]))
        assert box.contains(np.array([0.5 + 5e-10, 0.5]))
        assert not box.contains(np.array([0.51, 0.49]))

    def test_contains_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        box = BoundsBox(lo=np.full(4, 0.1), hi=np.full(4, 0.6))
        X = rng.random((100, 4))
        batch = box.contains_batch(X)
        singles = np.array([box.contains(x) for x in X])
        assert np.array_equal(batch, singles)

    def test_widths(self):
        box = BoundsBox(lo=np.array([0.0, 0.2]), hi=np.array([1.0, 0.5]))
        assert np.allclose(box.widths, [1.0, 0.3])
