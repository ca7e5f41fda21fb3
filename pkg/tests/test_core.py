import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctxbandit.core import (ActionDistribution, FiniteEnvironment, HistoryRecord, Policy, PolicyClass,
                            PolicyDistribution, empirical_best, induced_action_dist, induced_matrix,
                            ips_policy_value, ips_randomized_value, smooth, sparsify, sparsify_size,
                            true_value)
from ctxbandit.errors import DomainError, ParameterError

from conftest import random_class, random_env

TWO = PolicyClass([[0], [1]], 2)


class TestTypes:
    def test_policy_lookup_and_unknown_context(self):
        pi = Policy((0, 1, 1))
        assert pi(2) == 1
        with pytest.raises(DomainError):
            pi(3)

    def test_policy_class_validation(self):
        with pytest.raises(DomainError):
            PolicyClass([[0, 2]], 2)
        with pytest.raises(DomainError):
            PolicyClass.from_policies([], 2)
        with pytest.raises(DomainError):
            PolicyClass.from_policies([(0, 1), (0,)], 2)

    def test_all_maps(self):
        pc = PolicyClass.all_maps(3, 2)
        assert pc.N == 8
        assert len({tuple(r) for r in pc.table}) == 8

    def test_history_record_ranges(self):
        with pytest.raises(ParameterError):
            HistoryRecord(0, 0, 1.5, 0.5)
        with pytest.raises(ParameterError):
            HistoryRecord(0, 0, 0.5, 0.0)
        HistoryRecord(0, 0, 0.0, 1.0)

    def test_distribution_renormalizes_within_tolerance(self):
        P = PolicyDistribution([0.5, 0.5 + 5e-10])
        assert P.weights.sum() == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ParameterError):
            PolicyDistribution([0.5, 0.6])
        with pytest.raises(ParameterError):
            ActionDistribution([1.1, -0.1])

    def test_environment_validation(self):
        with pytest.raises(ParameterError):
            FiniteEnvironment([0.5, 0.6], [[0.1], [0.2]])
        with pytest.raises(ParameterError):
            FiniteEnvironment([1.0], [[1.2, 0.0]])
        with pytest.raises(ParameterError):
            FiniteEnvironment([1.0], [[0.2, 0.0]], law="gaussian")

    def test_environment_sampling_is_seeded(self):
        env = FiniteEnvironment([0.3, 0.7], [[0.2, 0.9], [0.5, 0.5]])
        a = env.sample(np.random.default_rng(4))
        b = env.sample(np.random.default_rng(4))
        assert a[0] == b[0] and np.array_equal(a[1], b[1])
        x, r = FiniteEnvironment([1.0], [[0.25, 0.75]], law="deterministic").sample(np.random.default_rng(0))
        assert x == 0 and r.tolist() == [0.25, 0.75]


class TestInducedAndSmooth:
    def test_symmetric_mixture(self):
        assert induced_action_dist(PolicyDistribution([0.5, 0.5]), TWO, 0).probs.tolist() == [0.5, 0.5]

    def test_point_mass(self):
        assert induced_action_dist(PolicyDistribution([1.0, 0.0]), TWO, 0).probs.tolist() == [1.0, 0.0]

    def test_three_policies(self):
        pc = PolicyClass([[0], [0], [1]], 2)
        W = induced_action_dist(PolicyDistribution([0.2, 0.3, 0.5]), pc, 0)
        np.testing.assert_allclose(W.probs, [0.5, 0.5], atol=1e-15)

    def test_unknown_context(self):
        with pytest.raises(DomainError):
            induced_action_dist(PolicyDistribution([0.5, 0.5]), TWO, 1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0, 1))
    def test_linearity(self, seed, alpha):
        rng = np.random.default_rng(seed)
        pc = random_class(rng, 6, 4, 3)
        P, Q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        mix = induced_matrix(PolicyDistribution(alpha * P + (1 - alpha) * Q), pc)
        sep = alpha * induced_matrix(PolicyDistribution(P), pc) + (1 - alpha) * induced_matrix(PolicyDistribution(Q), pc)
        np.testing.assert_allclose(mix, sep, atol=1e-12)

    def test_smooth_examples(self):
        np.testing.assert_allclose(smooth(ActionDistribution([0.5, 0.5]), 0.1, 2).probs, [0.5, 0.5])
        np.testing.assert_allclose(smooth(ActionDistribution([1, 0, 0]), 0.1, 3).probs, [0.8, 0.1, 0.1])
        W = ActionDistribution([0.2, 0.3, 0.5])
        np.testing.assert_array_equal(smooth(W, 0.0, 3).probs, W.probs)
        with pytest.raises(ParameterError):
            smooth(W, 0.4, 3)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 10_000), st.floats(0, 1))
    def test_smooth_minorization(self, K, seed, frac):
        W = ActionDistribution(np.random.default_rng(seed).dirichlet(np.ones(K)))
        mu = frac / K
        out = smooth(W, mu, K).probs
        assert out.min() >= mu - 1e-15
        assert out.sum() == pytest.approx(1.0)


class TestEstimators:
    def test_ips_examples(self):
        h = [HistoryRecord(0, 0, 0.5, 0.5)]
        assert ips_policy_value(h, Policy((0,))) == 1.0
        assert ips_policy_value(h, Policy((1,))) == 0.0
        h2 = [HistoryRecord(0, 0, 1.0, 0.25), HistoryRecord(1, 1, 0.5, 0.5)]
        assert ips_policy_value(h2, Policy((0, 0))) == 2.0
        assert ips_policy_value([], Policy((0,))) == 0.0

    def test_randomized_examples(self):
        h = [HistoryRecord(0, 0, 1.0, 0.5)]
        assert ips_randomized_value(h, np.array([[0.5, 0.5]])) == 1.0
        assert ips_randomized_value([], np.array([[0.5, 0.5]])) == 0.0

    def test_randomized_matches_deterministic(self, rng):
        from conftest import random_history

        pc = random_class(rng, 5, 4, 3)
        h = random_history(rng, 30, 4, 3)
        for i in range(pc.N):
            ind = np.zeros((4, 3))
            ind[np.arange(4), pc.table[i]] = 1.0
            assert ips_randomized_value(h, ind) == pytest.approx(ips_policy_value(h, pc[i]), abs=1e-12)
            assert ips_randomized_value(h, lambda x, a: float(pc.table[i, x] == a)) == pytest.approx(
                ips_policy_value(h, pc[i]), abs=1e-12)

    def test_empirical_best(self):
        h = [HistoryRecord(0, 0, 1.0, 0.5), HistoryRecord(0, 1, 0.25, 0.5)]
        # values: always-0 -> 2/2 = 1.0, always-1 -> 0.5/2 = 0.25
        assert empirical_best(h, TWO) == (0, 1.0)
        tie = [HistoryRecord(0, 0, 0.5, 0.5), HistoryRecord(0, 1, 0.5, 0.5)]
        assert empirical_best(tie, TWO)[0] == 0
        assert empirical_best([], TWO) == (0, 0.0)

    def test_empirical_best_matches_enumeration(self, rng):
        from conftest import random_history

        pc = random_class(rng, 12, 5, 3)
        h = random_history(rng, 40, 5, 3)
        vals = [ips_policy_value(h, pc[i]) for i in range(pc.N)]
        idx, v = empirical_best(h, pc)
        assert idx == int(np.argmax(vals)) and v == pytest.approx(max(vals), abs=1e-12)

    def test_true_value_examples(self):
        env = FiniteEnvironment([1.0], [[0.7, 0.2]])
        assert true_value(env, Policy((0,))) == pytest.approx(0.7)
        env2 = FiniteEnvironment([0.5, 0.5], [[0.4, 0.0], [0.0, 0.8]])
        assert true_value(env2, Policy((0, 1))) == pytest.approx(0.6)
        flat = FiniteEnvironment([0.3, 0.7], [[0.5, 0.5], [0.2, 0.2]])
        assert true_value(flat, (0, 0)) == pytest.approx(true_value(flat, (1, 1)))

    def test_policy_values_vectorized(self, rng):
        env = random_env(rng, 4, 3)
        pc = random_class(rng, 7, 4, 3)
        np.testing.assert_allclose(env.policy_values(pc), [true_value(env, pc[i]) for i in range(7)])


def exact_ips_expectation(env, logging_probs, pi):
    """E over (x, reward vector, a) of the one-record IPS estimate, by enumeration."""
    K = env.K
    total = 0.0
    for x in range(env.n_contexts):
        for bits in itertools.product((0, 1), repeat=K):
            pr = np.prod([env.reward_means[x, a] if b else 1 - env.reward_means[x, a] for a, b in enumerate(bits)])
            for a in range(K):
                p = logging_probs[x, a]
                est = bits[a] / p if pi[x] == a else 0.0
                total += env.context_probs[x] * pr * p * est
    return total


def test_ips_unbiased_by_enumeration(rng):
    for _ in range(5):
        env = random_env(rng, 3, 3)
        mu = 0.05
        logging = rng.dirichlet(np.ones(3), size=3) * (1 - 3 * mu) + mu
        pi = tuple(int(a) for a in rng.integers(0, 3, 3))
        assert exact_ips_expectation(env, logging, pi) == pytest.approx(true_value(env, pi), abs=1e-12)


class TestSparsify:
    def test_point_mass_and_single_draw(self, rng):
        P = PolicyDistribution.point_mass(2, 4)
        assert sparsify(P, 7, rng).weights.tolist() == P.weights.tolist()
        one = sparsify(PolicyDistribution([0.3, 0.7]), 1, rng).weights
        assert sorted(one.tolist()) == [0.0, 1.0]
        with pytest.raises(ParameterError):
            sparsify(P, 0, rng)

    def test_weights_are_multiples_of_one_over_m(self, rng):
        w = sparsify(PolicyDistribution(rng.dirichlet(np.ones(5))), 13, rng).weights
        np.testing.assert_allclose(w * 13, np.round(w * 13), atol=1e-12)

    def test_concentration_over_seeds(self):
        # P(|Bin(1e4, .5)/1e4 - .5| > .05) is astronomically small
        hits = sum(abs(sparsify(PolicyDistribution([0.5, 0.5]), 10_000, np.random.default_rng(s)).weights[0] - 0.5) <= 0.05
                   for s in range(100))
        assert hits >= 99

    def test_variance_contraction(self, rng):
        gamma, K = 0.5, 2
        for _ in range(3):
            pc = random_class(rng, 4, 3, K)
            mu = 0.2
            P = PolicyDistribution(rng.dirichlet(np.ones(4)))
            m = sparsify_size(gamma, mu)
            Wp = (1 - K * mu) * induced_matrix(P, pc) + mu
            x = int(rng.integers(3))
            a = int(pc.table[0, x])
            ref = 1.0 / Wp[x, a]
            devs = []
            for _ in range(10_000):
                Pt = sparsify(P, m, rng)
                Wt = (1 - K * mu) * induced_action_dist(Pt, pc, x).probs[a] + mu
                devs.append(abs(1.0 / Wt - ref))
            assert np.mean(devs) <= gamma * ref * 1.2
