"""Compilation of statements into polynomial (in)equalities over constituents.

The count anchors (12 for an influence on the four-variable clinical net,
10 for an additive synergy there) are fixed published values; the rest is
checked against independent enumeration and a definitional oracle that
evaluates the underlying conditional-probability inequalities directly.
"""

import itertools
import math

import numpy as np
import pytest

from beliefbox.canonical import (
    ROLE_AXIOM,
    ROLE_MAIN,
    ROLE_POSITIVITY,
    Polynomial,
    Tolerances,
    compile_axioms,
    compile_statement,
    compile_system,
    eval_constraint,
    normalize,
    satisfied_batch,
)
from beliefbox.model import ConstituentTable, Event, evaluate_conditional
from beliefbox.statements import Statement, parse_statement_line, parse_statements

from conftest import HIV_DSL, HIV_STATEMENTS, make_random_network


def stmt(line: str, network, sid: str = "s1") -> Statement:
    return Statement(sid, parse_statement_line(line, network))


def mains(constraints):
    return [c for c in constraints if c.provenance.role == ROLE_MAIN]


def positivity(constraints):
    return [c for c in constraints if c.provenance.role == ROLE_POSITIVITY]


class TestPolynomial:
    def test_make_merges_and_sorts(self):
        p = Polynomial.make([(1.0, (3, 1)), (2.0, (1, 3)), (0.5, (2,))])
        assert p.terms == ((0.5, (2,)), (3.0, (1, 3)))

    def test_zero_coefficients_dropped(self):
        p = Polynomial.make([(1.0, (0,)), (-1.0, (0,))])
        assert p.is_zero

    def test_arithmetic(self):
        a = Polynomial.linear([0, 1])
        b = Polynomial.linear([1])
        assert (a - b).terms == ((1.0, (0,)),)
        prod = a * b
        assert prod.terms == ((1.0, (0, 1)), (1.0, (1, 1)))
        assert prod.degree == 2

    def test_evaluate_matches_batch(self):
        rng = np.random.default_rng(0)
        p = Polynomial.make([(2.0, (0, 1)), (-1.0, (2,)), (0.25, ())])
        X = rng.random((40, 4))
        batch = p.evaluate_batch(X)
        singles = np.array([p.evaluate(x) for x in X])
        assert np.allclose(batch, singles)

    def test_linear_parts(self):
        p = Polynomial.make([(1.0, (0,)), (2.0, (3,)), (-0.5, ())])
        coefs, const = p.linear_parts()
        assert coefs == {0: 1.0, 3: 2.0}
        assert const == -0.5
        assert Polynomial.make([(1.0, (0, 1))]).linear_parts() is None


class TestAxioms:
    def test_count_and_shape(self):
        axioms = compile_axioms(16)
        assert len(axioms) == 17
        total = axioms[0]
        assert total.relation == "=" and total.rhs == 1.0
        assert len(total.lhs.terms) == 16
        assert all(c.relation == ">=" and c.rhs == 0.0 for c in axioms[1:])


class TestPointAndInterval:
    def test_point_prior_is_linear_equality(self, hiv_network):
        cs = compile_statement(stmt("P(h) = 0.005", hiv_network), hiv_network)
        assert len(cs) == 1
        c = cs[0]
        assert c.relation == "=" and c.rhs == 0.005
        assert c.lhs.terms == tuple((1.0, (i,)) for i in range(8))

    def test_interval_prior_two_inequalities(self, hiv_network):
        cs = compile_statement(stmt("0.1 <= P(n) <= 0.25", hiv_network), hiv_network)
        assert [c.relation for c in cs] == [">=", ">="]
        assert cs[0].rhs == 0.1
        assert cs[1].rhs == -0.25
        assert all(coef == -1.0 for coef, _ in cs[1].lhs.terms)

    def test_point_conditional_cross_multiplied(self, hiv_network):
        # P(i | c) = 1: numerator P(i,c) minus denominator P(c) leaves
        # exactly the (not i, c) constituents with coefficient -1
        cs = compile_statement(stmt("P(i | c) = 1", hiv_network), hiv_network)
        assert len(cs) == 2
        main = cs[0]
        assert main.relation == "=" and main.rhs == 0.0
        coefs = {m[0]: c for c, m in main.lhs.terms}
        assert coefs == {2: -1.0, 6: -1.0, 10: -1.0, 14: -1.0}
        pos = cs[1]
        assert pos.provenance.role == ROLE_POSITIVITY and pos.relation == ">"

    def test_interval_conditional_three_constraints(self, hiv_network):
        cs = compile_statement(stmt("0.1 <= P(n | h) <= 0.25", hiv_network), hiv_network)
        assert len(cs) == 3
        assert [c.relation for c in cs] == [">=", ">=", ">"]
        assert cs[2].provenance.role == ROLE_POSITIVITY

    def test_degrees_stay_at_most_two(self, hiv_network):
        for line in ["P(h) = 0.1", "P(h | n) = 0.1", "0.1 <= P(h | n) <= 0.2"]:
            for c in compile_statement(stmt(line, hiv_network), hiv_network):
                assert c.degree <= 2


class TestComparison:
    def test_prior_comparison_stays_linear(self, hiv_network):
        cs = compile_statement(stmt("P(i) > P(n)", hiv_network), hiv_network)
        assert len(cs) == 1
        assert cs[0].relation == ">" and cs[0].degree == 1

    def test_conditional_comparison_cross_multiplies(self, hiv_network):
        cs = compile_statement(stmt("P(h | n) > P(h | i)", hiv_network), hiv_network)
        main = mains(cs)
        assert len(main) == 1 and main[0].degree == 2
        assert len(positivity(cs)) == 2

    def test_less_than_flips_sides(self, hiv_network):
        lt = compile_statement(stmt("P(n) < P(i)", hiv_network), hiv_network)[0]
        gt = compile_statement(stmt("P(i) > P(n)", hiv_network), hiv_network)[0]
        assert lt.lhs == gt.lhs and lt.relation == gt.relation == ">"

    def test_coefficients_scale_terms(self, hiv_network):
        c = compile_statement(stmt("2 * P(i) <= 3 * P(n)", hiv_network), hiv_network)[0]
        coefs = {m[0]: v for v, m in c.lhs.terms}
        # right minus left: 3*P(n) - 2*P(i) >= 0
        n_idx = {0, 1, 2, 3, 8, 9, 10, 11}
        i_idx = {0, 1, 4, 5, 8, 9, 12, 13}
        for idx in n_idx | i_idx:
            expected = 3.0 * (idx in n_idx) - 2.0 * (idx in i_idx)
            assert coefs.get(idx, 0.0) == expected
        assert "2 * P(i)" in c.provenance.label

    def test_unit_coefficients_omitted_from_label(self, hiv_network):
        c = compile_statement(stmt("P(i) > P(n)", hiv_network), hiv_network)[0]
        assert c.provenance.label == "P(i) > P(n)"


class TestInfluenceAnchors:
    def test_influence_emits_twelve(self, hiv_network):
        cs = compile_statement(stmt("S+(N, H)", hiv_network), hiv_network)
        assert len(cs) == 12
        assert len(mains(cs)) == 4
        assert len(positivity(cs)) == 8

    def test_first_main_inequality(self, hiv_network):
        # context (i, c): P(h | n, i, c) >= P(h | ~n, i, c) cross-multiplies
        # to x0*x12 - x4*x8 >= 0 (the x0*x4 products cancel)
        cs = compile_statement(stmt("S+(N, H)", hiv_network), hiv_network)
        first = mains(cs)[0]
        assert first.relation == ">="
        assert first.rhs == 0.0
        assert first.lhs.terms == ((1.0, (0, 12)), (-1.0, (4, 8)))

    def test_negative_influence_flips_sign(self, hiv_network):
        plus = mains(compile_statement(stmt("S+(N, H)", hiv_network), hiv_network))
        minus = mains(compile_statement(stmt("S-(N, H)", hiv_network), hiv_network))
        for a, b in zip(plus, minus):
            assert a.lhs == b.lhs.scale(-1.0) or a.lhs.scale(-1.0) == b.lhs

    def test_zero_influence_emits_equalities(self, hiv_network):
        cs = compile_statement(stmt("S0(N, H)", hiv_network), hiv_network)
        assert all(c.relation == "=" for c in mains(cs))

    def test_mains_are_degree_two_multilinear(self, hiv_network):
        cs = compile_statement(stmt("S+(N, H)", hiv_network), hiv_network)
        for c in mains(cs):
            assert c.degree == 2
            for _, mono in c.lhs.terms:
                assert len(set(mono)) == len(mono)


class TestSynergyAnchors:
    def test_additive_synergy_emits_ten(self, hiv_network):
        cs = compile_statement(stmt("Y-({I, C}, H)", hiv_network), hiv_network)
        assert len(cs) == 10
        assert len(mains(cs)) == 2
        assert len(positivity(cs)) == 8

    def test_additive_mains_degree_four(self, hiv_network):
        cs = compile_statement(stmt("Y-({I, C}, H)", hiv_network), hiv_network)
        for c in mains(cs):
            assert c.degree == 4
            for _, mono in c.lhs.terms:
                assert len(set(mono)) == len(mono)

    def test_additive_coefficient_set(self, hiv_network):
        cs = compile_statement(stmt("Y-({I, C}, H)", hiv_network), hiv_network)
        coefs = sorted({coef for c in mains(cs) for coef, _ in c.lhs.terms})
        assert coefs == [-2.0, -1.0, 1.0, 2.0]

    def test_pair_order_does_not_matter(self, hiv_network):
        a = mains(compile_statement(stmt("Y-({I, C}, H)", hiv_network), hiv_network))
        b = mains(compile_statement(stmt("Y-({C, I}, H)", hiv_network), hiv_network))
        assert {(c.lhs.terms, c.relation, c.rhs) for c in a} == {
            (c.lhs.terms, c.relation, c.rhs) for c in b
        }

    def test_product_synergy_emits_six(self, hiv_network):
        cs = compile_statement(stmt("X-({N, I}, h)", hiv_network), hiv_network)
        assert len(cs) == 6
        assert len(mains(cs)) == 2
        assert len(positivity(cs)) == 4

    def test_product_first_main(self, hiv_network):
        # explaining away with effect h observed, context c:
        # P(n | ~i, h, c) >= P(n | i, h, c) becomes x2*x4 - x0*x6 >= 0
        cs = compile_statement(stmt("X-({N, I}, h)", hiv_network), hiv_network)
        first = mains(cs)[0]
        assert first.relation == ">="
        assert first.lhs.terms == ((-1.0, (0, 6)), (1.0, (2, 4)))


class TestCountFormulas:
    """Main-constraint counts against both the closed formulas and a
    brute-force enumeration of (threshold, pair, context) tuples."""

    @staticmethod
    def context_count(network, target, exclude):
        sizes = [
            len(network.variable(p).values)
            for p in network.parents(target)
            if p not in exclude
        ]
        return math.prod(sizes)

    def test_influence_counts(self):
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(40):
            net = make_random_network(rng, n_vars=4)
            for target in [v.name for v in net.variables]:
                parents = net.parents(target)
                if not parents:
                    continue
                source = parents[0]
                k0 = len(net.variable(target).values)
                k1 = len(net.variable(source).values)
                K = self.context_count(net, target, {source})
                expected = math.comb(k1, 2) * (k0 - 1) * K
                got = mains(
                    compile_statement(stmt(f"S+({source}, {target})", net), net)
                )
                assert len(got) == expected
                checked += 1
        assert checked >= 20

    def test_additive_synergy_counts(self):
        rng = np.random.default_rng(12)
        checked = 0
        for _ in range(60):
            net = make_random_network(rng, n_vars=4)
            for target in [v.name for v in net.variables]:
                parents = net.parents(target)
                if len(parents) < 2:
                    continue
                v1, v2 = parents[0], parents[1]
                k0 = len(net.variable(target).values)
                k1 = len(net.variable(v1).values)
                k2 = len(net.variable(v2).values)
                K = self.context_count(net, target, {v1, v2})
                expected = math.comb(k1, 2) * math.comb(k2, 2) * (k0 - 1) * K
                got = mains(
                    compile_statement(stmt(f"Y+({{{v1}, {v2}}}, {target})", net), net)
                )
                assert len(got) == expected
                checked += 1
        assert checked >= 10

    def test_product_synergy_counts(self):
        rng = np.random.default_rng(13)
        checked = 0
        for _ in range(60):
            net = make_random_network(rng, n_vars=4)
            for target in [v.name for v in net.variables]:
                parents = net.parents(target)
                if len(parents) < 2:
                    continue
                v1, v2 = parents[0], parents[1]
                effect = net.variable(target).values[0]
                k1 = len(net.variable(v1).values)
                k2 = len(net.variable(v2).values)
                K = self.context_count(net, target, {v1, v2})
                expected = (k1 - 1) * math.comb(k2, 2) * K
                got = mains(
                    compile_statement(
                        stmt(f"X+({{{v1}, {v2}}}, {effect})", net), net
                    )
                )
                assert len(got) == expected
                checked += 1
        assert checked >= 10


class TestDefinitionalOracle:
    """At strictly positive points, each compiled main constraint must agree
    in sign with the conditional-probability difference that defines it.
    Clearing positive denominators never flips an inequality."""

    @staticmethod
    def positive_points(rng, k, n):
        X = rng.dirichlet(np.ones(k), size=n)
        return np.clip(X, 1e-6, None) / np.clip(X, 1e-6, None).sum(
            axis=1, keepdims=True
        )

    def influence_sides(self, network, source, target):
        # enumeration mirror: thresholds ascending, value pairs, context product
        tvar = network.variable(target)
        svar = network.variable(source)
        others = [p for p in network.parents(target) if p != source]
        sides = []
        for m in range(len(tvar.values) - 1):
            for i, j in itertools.combinations(range(len(svar.values)), 2):
                for ctx in itertools.product(
                    *(network.variable(o).values for o in others)
                ):
                    base = dict(zip(others, ctx))
                    hi = Event.of({source: svar.values[i], **base})
                    lo = Event.of({source: svar.values[j], **base})
                    sides.append((m, hi, lo))
        return sides

    @staticmethod
    def threshold_prob(network, x, target, m, cond_event):
        tvar = network.variable(target)
        total = 0.0
        for pos in range(m + 1):
            total += evaluate_conditional(
                network, x, Event.of({target: tvar.values[pos]}), cond_event
            )
        return total

    def test_influence_agrees_with_conditionals(self, hiv_network):
        rng = np.random.default_rng(21)
        X = self.positive_points(rng, 16, 200)
        cs = mains(compile_statement(stmt("S+(N, H)", hiv_network), hiv_network))
        sides = self.influence_sides(hiv_network, "N", "H")
        assert len(cs) == len(sides)
        for c, (m, hi, lo) in zip(cs, sides):
            for x in X:
                poly = c.lhs.evaluate(x)
                diff = self.threshold_prob(
                    hiv_network, x, "H", m, hi
                ) - self.threshold_prob(hiv_network, x, "H", m, lo)
                assert (poly >= -1e-12) == (diff >= -1e-9)

    def test_product_synergy_agrees_with_conditionals(self, hiv_network):
        rng = np.random.default_rng(22)
        X = self.positive_points(rng, 16, 200)
        cs = mains(compile_statement(stmt("X-({N, I}, h)", hiv_network), hiv_network))
        # enumeration: N thresholds, I value pairs, C contexts
        nvar = hiv_network.variable("N")
        ivar = hiv_network.variable("I")
        cases = []
        for m in range(len(nvar.values) - 1):
            for i, j in itertools.combinations(range(len(ivar.values)), 2):
                for cval in hiv_network.variable("C").values:
                    cases.append((m, ivar.values[i], ivar.values[j], cval))
        assert len(cs) == len(cases)
        for c, (m, i_hi, i_lo, cval) in zip(cs, cases):
            for x in X:
                poly = c.lhs.evaluate(x)
                # explaining away: observing the competing cause at its higher
                # value makes the thresholded one less likely
                with_hi = self.threshold_prob(
                    hiv_network, x, "N", m, Event.of(I=i_hi, H="h", C=cval)
                )
                with_lo = self.threshold_prob(
                    hiv_network, x, "N", m, Event.of(I=i_lo, H="h", C=cval)
                )
                assert (poly >= -1e-12) == (with_lo >= with_hi - 1e-9)


class TestCompileSystem:
    def test_clinical_set_totals_twenty_six(self, hiv_parsed):
        system = compile_system(hiv_parsed.statements, hiv_parsed.network)
        assert len(system.constraints) == 26
        by_axiom = [c for c in system.constraints if c.provenance.role == ROLE_AXIOM]
        assert len(by_axiom) == 17

    def test_single_influence_totals_twenty_nine(self, hiv_network):
        system = compile_system([stmt("S+(N, H)", hiv_network)], hiv_network)
        assert len(system.constraints) == 29

    def test_empty_set_is_axioms_only(self, hiv_network):
        system = compile_system([], hiv_network)
        assert len(system.constraints) == 17

    def test_by_statement_partitions(self, hiv_parsed):
        system = compile_system(hiv_parsed.statements, hiv_parsed.network)
        counts = system.by_statement()
        assert sorted(k for k in counts if k is not None) == ["s1", "s2", "s3", "s4"]
        assert counts[None] == 17  # axioms carry no statement id
        assert sum(counts.values()) == 26

    def test_raw_emission_keeps_duplicates(self, hiv_network):
        sts = [stmt("P(h | n) = 0.2", hiv_network, "s1"), stmt("P(h | n) = 0.3", hiv_network, "s2")]
        system = compile_system(sts, hiv_network)
        pos = [c for c in system.constraints if c.provenance.role == ROLE_POSITIVITY]
        assert len(pos) == 2  # same denominator, one copy per statement
        assert not system.dedup_applied


class TestNormalize:
    def test_dedup_merges_provenance(self, hiv_network):
        sts = [stmt("P(h | n) = 0.2", hiv_network, "s1"), stmt("P(h | n) = 0.3", hiv_network, "s2")]
        system = normalize(compile_system(sts, hiv_network))
        pos = [c for c in system.constraints if c.provenance.role == ROLE_POSITIVITY]
        assert len(pos) == 1
        assert "s2" in pos[0].provenance.merged_ids

    def test_axiom_implied_bounds_flagged(self, hiv_network):
        # an interval spanning all of [0,1] adds nothing beyond the axioms
        system = normalize(
            compile_system([stmt("0 <= P(h) <= 1", hiv_network)], hiv_network)
        )
        flagged = [c for c in system.constraints if c.redundant]
        assert len(flagged) == 2

    def test_contradictions_are_kept(self, hiv_network):
        # a self-comparison compiles to 0 > 0; normalize must keep it so
        # diagnosis can surface the contradiction instead of hiding it
        system = compile_system([stmt("P(i) > P(i)", hiv_network)], hiv_network)
        zero = [c for c in system.constraints if c.lhs.is_zero and c.relation == ">"]
        normalized = normalize(system)
        still = [c for c in normalized.constraints if c.lhs.is_zero and c.relation == ">"]
        assert len(still) == len(zero) == 1

    def test_idempotent(self, hiv_parsed):
        system = compile_system(hiv_parsed.statements, hiv_parsed.network)
        once = normalize(system)
        twice = normalize(once)
        assert [c.lhs for c in twice.constraints] == [c.lhs for c in once.constraints]
        assert len(twice.constraints) == len(once.constraints)

    def test_feasible_set_unchanged(self, hiv_parsed):
        # random points satisfy the raw system iff they satisfy the normalized one
        raw = compile_system(hiv_parsed.statements, hiv_parsed.network)
        norm = normalize(raw)
        rng = np.random.default_rng(31)
        X = rng.dirichlet(np.ones(16), size=400)
        tol = Tolerances()

        def sat(system):
            ok = np.ones(X.shape[0], dtype=bool)
            for c in system.constraints:
                ok &= satisfied_batch(c, X, tol)
            return ok

        assert np.array_equal(sat(raw), sat(norm))


class TestEvaluation:
    def test_equality_has_tolerance_band(self, hiv_network):
        c = compile_statement(stmt("P(h) = 0.5", hiv_network), hiv_network)[0]
        x = np.full(16, 1 / 16)  # P(h) = 0.5 exactly
        assert eval_constraint(c, x).satisfied
        x2 = x.copy()
        x2[0] += 0.0015
        x2[15] -= 0.0015
        assert eval_constraint(c, x2).satisfied  # inside the 2e-3 band
        x3 = x.copy()
        x3[0] += 0.005
        x3[15] -= 0.005
        assert not eval_constraint(c, x3).satisfied

    def test_per_statement_tolerance_override(self, hiv_network):
        c = compile_statement(stmt("P(h) = 0.5", hiv_network), hiv_network)[0]
        x = np.full(16, 1 / 16)
        x[0] += 0.005
        x[15] -= 0.005
        tol = Tolerances(per_statement={"s1": 0.02})
        assert eval_constraint(c, x, tol).satisfied

    def test_strict_is_exact(self, hiv_network):
        c = compile_statement(stmt("P(i) > P(n)", hiv_network), hiv_network)[0]
        x = np.full(16, 1 / 16)  # P(i) == P(n)
        assert not eval_constraint(c, x).satisfied

    def test_weak_inequality_has_slack(self, hiv_network):
        c = compile_statement(stmt("0.25 <= P(i) <= 0.75", hiv_network), hiv_network)[0]
        i_block = {0, 1, 4, 5, 8, 9, 12, 13}
        p = 0.25 - 1e-10  # a hair below the bound, inside the 1e-9 slack
        x = np.array([p / 8 if j in i_block else (1 - p) / 8 for j in range(16)])
        assert satisfied_batch(c, x[None, :])[0]
        assert eval_constraint(c, x).satisfied
