"""Constituent indexing and event evaluation.

The indexing contract everything else builds on: indices are mixed-radix
numbers over value positions in declaration order, last variable fastest,
position 0 for the highest value of each variable.
"""

import numpy as np
import pytest

from beliefbox.model import (
    ConstituentTable,
    Event,
    Network,
    NetworkError,
    UndefinedConditional,
    Variable,
    build_network,
    evaluate_conditional,
    evaluate_prior,
    index_set,
    joint_indices,
)

from conftest import enumerate_assignments, make_random_network


class TestVariable:
    def test_positions_follow_declared_order(self):
        v = Variable("X", ("high", "mid", "low"))
        assert v.position("high") == 0
        assert v.position("low") == 2
        assert not v.is_binary

    def test_rejects_single_value(self):
        with pytest.raises(NetworkError):
            Variable("X", ("only",))

    def test_rejects_duplicate_values(self):
        with pytest.raises(NetworkError):
            Variable("X", ("a", "a"))

    def test_rejects_non_identifier(self):
        with pytest.raises(NetworkError):
            Variable("X", ("ok", "not ok"))


class TestEvent:
    def test_of_and_as_dict(self):
        e = Event.of(A="a1", B="b0")
        assert e.as_dict() == {"A": "a1", "B": "b0"}
        assert e.variables == frozenset({"A", "B"})

    def test_sure_event(self):
        assert Event.of().is_sure
        assert not Event.of(A="a1").is_sure

    def test_rejects_repeated_variable(self):
        with pytest.raises(ValueError):
            Event(frozenset({("A", "a1"), ("A", "a2")}))


class TestConstituentTable:
    def test_hiv_strides(self, hiv_network):
        t = ConstituentTable(hiv_network.variables)
        assert t.k == 16
        assert t.strides == (8, 4, 2, 1)

    def test_index_digit_round_trip(self, hiv_network):
        t = ConstituentTable(hiv_network.variables)
        for i in range(t.k):
            assert t.index_of(t.digits(i)) == i

    def test_last_variable_varies_fastest(self):
        t = ConstituentTable((Variable("A", ("a0", "a1")), Variable("B", ("b0", "b1", "b2"))))
        assert t.k == 6
        # A=a0 occupies indices 0..2, B cycles within
        assert t.index_of((0, 0)) == 0
        assert t.index_of((0, 2)) == 2
        assert t.index_of((1, 0)) == 3

    def test_indices_where_multiple(self, hiv_network):
        t = ConstituentTable(hiv_network.variables)
        # i fixed (position 0), cbar fixed (position 1), H and N free
        got = t.indices_where({"I": [0], "C": [1]})
        assert got.tolist() == [1, 5, 9, 13]


class TestNetwork:
    def test_parents_children_in_declaration_order(self, hiv_network):
        assert hiv_network.parents("H") == ("N", "I", "C")
        assert hiv_network.children("I") == ("H", "C")

    def test_value_ownership_is_global(self):
        with pytest.raises(NetworkError):
            build_network(
                [Variable("A", ("x", "y")), Variable("B", ("x", "z"))], []
            )

    def test_rejects_duplicate_variable(self):
        with pytest.raises(NetworkError):
            build_network([Variable("A", ("a0", "a1")), Variable("A", ("a2", "a3"))], [])

    def test_rejects_unknown_endpoint(self):
        with pytest.raises(NetworkError):
            build_network([Variable("A", ("a0", "a1"))], [("A", "B")])

    def test_rejects_self_loop(self):
        with pytest.raises(NetworkError):
            build_network([Variable("A", ("a0", "a1"))], [("A", "A")])

    def test_rejects_cycle(self):
        vs = [Variable(n, (n.lower() + "0", n.lower() + "1")) for n in "ABC"]
        with pytest.raises(NetworkError):
            build_network(vs, [("A", "B"), ("B", "C"), ("C", "A")])

    def test_rejects_oversized_joint(self):
        vs = [Variable(f"V{i}", (f"u{i}", f"w{i}")) for i in range(3)]
        with pytest.raises(NetworkError):
            build_network(vs, [], max_k=4)


class TestIndexSets:
    def test_single_literal_block(self, hiv_network):
        got = index_set(hiv_network, Event.of(H="h"))
        assert got.tolist() == list(range(8))

    def test_conjunction(self, hiv_network):
        got = index_set(hiv_network, Event.of(I="i", C="cbar"))
        assert got.tolist() == [1, 5, 9, 13]

    def test_sure_event_is_everything(self, hiv_network):
        assert index_set(hiv_network, Event.of()).tolist() == list(range(16))

    def test_joint_indices_intersect(self, hiv_network):
        got = joint_indices(hiv_network, Event.of(H="h"), Event.of(I="i", C="cbar"))
        assert got.tolist() == [1, 5]

    def test_joint_contradiction_is_empty(self, hiv_network):
        got = joint_indices(hiv_network, Event.of(I="i"), Event.of(I="ibar"))
        assert got.size == 0

    def test_matches_brute_force_enumeration(self):
        # oracle: filter the plain cartesian product by literal positions
        rng = np.random.default_rng(42)
        for _ in range(25):
            net = make_random_network(rng)
            names = [v.name for v in net.variables]
            n_lits = int(rng.integers(1, len(names) + 1))
            chosen = list(rng.choice(names, size=n_lits, replace=False))
            lits = {}
            for name in chosen:
                var = net.variable(name)
                lits[name] = var.values[int(rng.integers(0, len(var.values)))]
            event = Event.of(lits)
            expected = []
            for idx, assignment in enumerate(enumerate_assignments(net)):
                ok = all(
                    assignment[names.index(n)] == net.variable(n).position(v)
                    for n, v in lits.items()
                )
                if ok:
                    expected.append(idx)
            assert index_set(net, event).tolist() == expected


class TestEvaluation:
    def test_prior_on_uniform_point(self, hiv_network):
        x = np.full(16, 1 / 16)
        p = evaluate_prior(hiv_network, x, Event.of(I="i", C="cbar"))
        assert p == pytest.approx(4 / 16)

    def test_conditional_on_uniform_point(self, hiv_network):
        x = np.full(16, 1 / 16)
        p = evaluate_conditional(hiv_network, x, Event.of(H="h"), Event.of(N="n"))
        assert p == pytest.approx(0.5)

    def test_conditional_with_zero_condition_raises(self, hiv_network):
        x = np.zeros(16)
        x[0] = 1.0  # everything on h,n,i,c
        with pytest.raises(UndefinedConditional):
            evaluate_conditional(hiv_network, x, Event.of(H="h"), Event.of(N="nbar"))

    def test_conditional_equals_ratio_of_priors(self, hiv_network):
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.dirichlet(np.ones(16))
            num = evaluate_prior(hiv_network, x, Event.of(H="h", N="n"))
            den = evaluate_prior(hiv_network, x, Event.of(N="n"))
            got = evaluate_conditional(hiv_network, x, Event.of(H="h"), Event.of(N="n"))
            assert got == pytest.approx(num / den)
