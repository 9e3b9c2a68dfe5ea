import math
from fractions import Fraction

import numpy as np
import pytest

from sociallearn.asymptotics import (
    check_consistency,
    decompose,
    divergence_matrix,
    equivalent_sets,
    kl_divergence,
    limiting_matrix,
    limiting_matrix_exact,
    observationally_equivalent_set,
    pairwise_rejection_rates,
    rejection_rates,
    subnetwork_confidence,
)
from sociallearn.harness import generate_scenario
from sociallearn.model import LikelihoodModel, NetworkGraph

TRIANGLE = NetworkGraph(3, ((0, 1), (0, 2), (1, 2)))
LN3 = math.log(3.0)


def peaked(q: float, m: int = 10) -> LikelihoodModel:
    r = (1.0 - q) / (m - 1)
    table = np.full((m, m), r)
    np.fill_diagonal(table, q)
    return LikelihoodModel(0, table, r)


def uniform_model(m: int = 10) -> LikelihoodModel:
    return LikelihoodModel(0, np.full((m, m), 1.0 / m), 1.0 / m)


class TestEquivalentSets:
    def test_peaked_model_identifies_everything(self):
        assert observationally_equivalent_set(peaked(0.28), 3) == {3}

    def test_uniform_model_identifies_nothing(self):
        assert observationally_equivalent_set(uniform_model(), 2) == set(range(10))

    def test_duplicated_row(self):
        table = np.array([[0.6, 0.2, 0.2], [0.6, 0.2, 0.2], [0.2, 0.6, 0.2]])
        model = LikelihoodModel(0, table, 0.2)
        assert observationally_equivalent_set(model, 1) == {0, 1}
        assert observationally_equivalent_set(model, 2) == {2}

    def test_two_groups_block_structure(self):
        cfg = generate_scenario("two-groups")
        sets = equivalent_sets(cfg)
        assert sets[0] == {0}
        assert sets[5] == {5}
        for k in (1, 2, 3, 4):
            assert sets[k] == {0, 1, 2, 3, 4}
        for k in (6, 7, 8, 9):
            assert sets[k] == {5, 6, 7, 8, 9}

    def test_tolerance_is_tight(self):
        table = np.array([[0.6, 0.2, 0.2], [0.6 + 1e-9, 0.2 - 1e-9, 0.2]])
        model = LikelihoodModel(0, table, 0.19)
        assert observationally_equivalent_set(model, 0) == {0}


class TestKlDivergence:
    def test_zero_on_equivalent_state(self):
        table = np.array([[0.6, 0.2, 0.2], [0.6, 0.2, 0.2], [0.2, 0.6, 0.2]])
        model = LikelihoodModel(0, table, 0.2)
        assert kl_divergence(model, 1, 0) == 0.0

    def test_ten_state_peaked_pair(self):
        # 0.28 against 0.08: (0.28 - 0.08) * ln(0.28 / 0.08)
        d = kl_divergence(peaked(0.28), 0, 4)
        assert abs(d - 0.2 * math.log(3.5)) < 1e-12
        assert abs(d - 0.25055259369907362) < 1e-12

    def test_peaked_against_uniform_row(self):
        table = np.full((2, 10), 0.08)
        table[0, 0] = 0.28
        table[1] = 0.1
        model = LikelihoodModel(0, table, 0.08)
        expected = 0.28 * math.log(2.8) + 0.72 * math.log(0.8)
        assert abs(kl_divergence(model, 0, 1) - expected) < 1e-12

    def test_two_state_oracle(self):
        table = np.array([[0.9, 0.1], [0.1, 0.9]])
        model = LikelihoodModel(0, table, 0.1)
        assert abs(kl_divergence(model, 0, 1) - 0.8 * math.log(9.0)) < 1e-12

    def test_brute_force_cross_check(self, rng):
        table = rng.uniform(0.05, 1.0, size=(4, 6))
        table /= table.sum(axis=1, keepdims=True)
        model = LikelihoodModel(0, table, float(table.min()))
        for j in range(4):
            manual = sum(
                table[2, z] * math.log(table[2, z] / table[j, z]) for z in range(6)
            )
            assert abs(kl_divergence(model, 2, j) - manual) < 1e-12

    def test_matrix_layout(self):
        cfg = generate_scenario("triangle-consistent")
        d = divergence_matrix(cfg)
        assert d.shape == (3, 3)
        for k, t in enumerate(cfg.true_states):
            assert d[k, t] == 0.0
        assert np.all(d >= 0.0)


class TestLimitingMatrix:
    def test_consistent_triangle_exact(self):
        sets = (frozenset({0, 1}), frozenset({1}), frozenset({2}))
        exact = limiting_matrix_exact(sets, TRIANGLE)
        expected = [
            [Fraction(2, 3), Fraction(1, 3), Fraction(0)],
            [Fraction(1, 3), Fraction(2, 3), Fraction(0)],
            [Fraction(0), Fraction(0), Fraction(1)],
        ]
        assert exact == expected

    def test_disjoint_sets_give_identity(self):
        sets = (frozenset({0}), frozenset({1}), frozenset({2}))
        assert np.array_equal(limiting_matrix(sets, TRIANGLE), np.eye(3))

    def test_consensus_triangle_exact(self):
        sets = (frozenset({0, 1, 2}), frozenset({1}), frozenset({2}))
        exact = limiting_matrix_exact(sets, TRIANGLE)
        expected = [
            [Fraction(3, 5), Fraction(1, 4), Fraction(1, 4)],
            [Fraction(1, 5), Fraction(3, 4), Fraction(0)],
            [Fraction(1, 5), Fraction(0), Fraction(3, 4)],
        ]
        assert exact == expected

    def test_float_matches_exact(self):
        sets = (frozenset({0, 1, 2}), frozenset({1}), frozenset({2}))
        a = limiting_matrix(sets, TRIANGLE)
        exact = limiting_matrix_exact(sets, TRIANGLE)
        for l in range(3):
            for k in range(3):
                assert abs(a[l, k] - float(exact[l][k])) < 1e-15

    def test_columns_sum_to_one_exactly(self):
        cfg = generate_scenario("two-groups")
        exact = limiting_matrix_exact(equivalent_sets(cfg), cfg.graph)
        for k in range(10):
            assert sum(exact[l][k] for l in range(10)) == 1


class TestDecompose:
    def test_consistent_triangle_blocks(self):
        a = np.array([
            [2 / 3, 1 / 3, 0.0],
            [1 / 3, 2 / 3, 0.0],
            [0.0, 0.0, 1.0],
        ])
        d = decompose(a)
        assert d.components == ((0, 1), (2,))
        assert np.allclose(d.perron[0], [0.5, 0.5], rtol=0, atol=1e-12)
        assert np.allclose(d.perron[1], [1.0], rtol=0, atol=0)
        proj = d.projector()
        expected = np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(proj, expected, rtol=0, atol=1e-12)

    def test_identity_gives_singletons(self):
        d = decompose(np.eye(4))
        assert d.components == ((0,), (1,), (2,), (3,))
        assert all(np.array_equal(p, [1.0]) for p in d.perron)

    def test_consensus_triangle_perron(self):
        a = np.array([
            [0.6, 0.25, 0.25],
            [0.2, 0.75, 0.0],
            [0.2, 0.0, 0.75],
        ])
        d = decompose(a)
        assert d.n_components == 1
        assert np.allclose(d.perron[0], [5 / 13, 4 / 13, 4 / 13], rtol=0, atol=1e-10)

    def test_perron_is_fixed_point(self):
        cfg = generate_scenario("two-groups")
        a = limiting_matrix(equivalent_sets(cfg), cfg.graph)
        d = decompose(a)
        assert d.components == (tuple(range(5)), tuple(range(5, 10)))
        for comp, p in zip(d.components, d.perron):
            sub = a[np.ix_(comp, comp)]
            assert np.max(np.abs(sub @ p - p)) < 1e-10
            assert abs(p.sum() - 1.0) < 1e-12
            assert np.all(p > 0)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            decompose(np.zeros((2, 3)))

    def test_rejects_asymmetric_support(self):
        with pytest.raises(ValueError):
            decompose(np.array([[1.0, 0.3], [0.0, 0.7]]))

    def test_component_of(self):
        d = decompose(np.eye(3))
        assert [d.component_of(k) for k in range(3)] == [0, 1, 2]
        with pytest.raises(KeyError):
            d.component_of(5)


class TestConfidence:
    def test_consistent_triangle_values(self):
        cfg = generate_scenario("triangle-consistent")
        decomp = decompose(limiting_matrix(equivalent_sets(cfg), cfg.graph))
        confs = subnetwork_confidence(decomp, divergence_matrix(cfg))
        block, single = confs
        assert block.agents == (0, 1)
        # agent 1 cannot tell theta1 from theta2, agent 2 rejects theta1
        # at 0.4 ln 3 nats per step
        assert abs(block.values[0] + 0.2 * LN3) < 1e-12
        assert block.values[1] == 0.0
        assert abs(block.values[2] + 0.4 * LN3) < 1e-12
        assert block.best == (1,)
        assert single.agents == (2,)
        assert single.best == (2,)
        assert single.values[2] == 0.0

    def test_consensus_triangle_ranking(self):
        cfg = generate_scenario("triangle-consensus")
        decomp = decompose(limiting_matrix(equivalent_sets(cfg), cfg.graph))
        confs = subnetwork_confidence(decomp, divergence_matrix(cfg))
        assert len(confs) == 1
        conf = confs[0]
        d1 = 0.175 * math.log(0.45 / 0.275)
        d2 = 0.55 * math.log(0.70 / 0.15)
        assert abs(conf.values[0] + 4 / 13 * (d1 + d2)) < 1e-10
        assert abs(conf.values[1] + 4 / 13 * d2) < 1e-10
        assert abs(conf.values[2] + 4 / 13 * d1) < 1e-10
        assert conf.best == (2,)

    def test_tied_argmax_is_kept(self):
        decomp = decompose(np.eye(2))
        divergences = np.array([[0.0, 0.0, 0.3], [0.1, 0.0, 0.0]])
        confs = subnetwork_confidence(decomp, divergences)
        assert confs[0].best == (0, 1)
        assert confs[1].best == (1, 2)


class TestConsistency:
    def test_consistent_triangle(self):
        cfg = generate_scenario("triangle-consistent")
        sets = equivalent_sets(cfg)
        decomp = decompose(limiting_matrix(sets, cfg.graph))
        report = check_consistency(sets, cfg.graph, cfg.true_states, decomp)
        assert report.globally_consistent
        assert report.disjoint_witnesses == ()
        assert report.intersection_witnesses == ()

    def test_consensus_triangle_violations(self):
        cfg = generate_scenario("triangle-consensus")
        sets = equivalent_sets(cfg)
        decomp = decompose(limiting_matrix(sets, cfg.graph))
        report = check_consistency(sets, cfg.graph, cfg.true_states, decomp)
        assert not report.globally_consistent
        assert set(report.disjoint_witnesses) == {(0, 1), (0, 2)}
        assert not report.intersection_ok

    def test_two_groups_consistent(self):
        cfg = generate_scenario("two-groups")
        sets = equivalent_sets(cfg)
        decomp = decompose(limiting_matrix(sets, cfg.graph))
        report = check_consistency(sets, cfg.graph, cfg.true_states, decomp)
        assert report.globally_consistent

    def test_single_identifying_agent(self):
        g = NetworkGraph(1, ())
        sets = (frozenset({3}),)
        decomp = decompose(np.eye(1))
        report = check_consistency(sets, g, (3,), decomp)
        assert report.globally_consistent

    def test_single_confused_agent(self):
        g = NetworkGraph(1, ())
        sets = (frozenset({2, 3}),)
        decomp = decompose(np.eye(1))
        report = check_consistency(sets, g, (3,), decomp)
        assert not report.globally_consistent
        assert report.intersection_witnesses == ((0, (2, 3)),)


class TestRateConstants:
    def test_peaked_ten_state(self):
        rates = rejection_rates(peaked(0.28), 0)
        assert rates.rejectable
        dmin = 0.2 * math.log(3.5)
        assert abs(rates.x + 0.5 * dmin) < 1e-12
        assert abs(rates.x + 0.12527629684953681) < 1e-12
        assert abs(rates.y - dmin**2 / (8.0 * math.log(0.08) ** 2)) < 1e-12
        assert rates.y > 0

    def test_uniform_model_rejects_nothing(self):
        rates = rejection_rates(uniform_model(), 0)
        assert not rates.rejectable
        assert rates.x is None and rates.y is None

    def test_alpha_override_changes_only_y(self):
        base = rejection_rates(peaked(0.28), 0)
        tight = rejection_rates(peaked(0.28), 0, alpha=0.01)
        assert tight.x == base.x
        assert tight.y != base.y

    def test_pair_identical_agents(self):
        model = peaked(0.28)
        pair = pairwise_rejection_rates(model, 0, model, 0)
        d = 0.2 * math.log(3.5)
        assert pair.rejectable
        assert abs(pair.c - d) < 1e-12
        assert abs(pair.d - 2.0 * d**2 / (32.0 * math.log(0.08) ** 2)) < 1e-12

    def test_pair_different_states_widens_domain(self):
        model = peaked(0.28)
        pair = pairwise_rejection_rates(model, 0, model, 1)
        d = 0.2 * math.log(3.5)
        # the true state of one agent is rejectable only by the other
        assert abs(pair.c - 0.5 * d) < 1e-12
        assert abs(pair.d - d**2 / (32.0 * math.log(0.08) ** 2)) < 1e-12

    def test_pair_uninformative(self):
        pair = pairwise_rejection_rates(uniform_model(), 0, uniform_model(), 1)
        assert not pair.rejectable
        assert pair.c is None and pair.d is None
