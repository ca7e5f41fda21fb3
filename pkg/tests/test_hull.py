import numpy as np
import pytest

from ctxbandit.amo import BruteForceOracle, CountingOracle
from ctxbandit.core import PolicyClass, PolicyDistribution
from ctxbandit.errors import ParameterError
from ctxbandit.optim.ellipsoid import Hyperplane
from ctxbandit.optim.hull import (HullEmbedding, InHull, hull_membership, linopt_over_hull,
                                  project_onto_vertices)

from conftest import random_class

SEG = PolicyClass([[0], [1]], 2)


def seg():
    return HullEmbedding(SEG, [0]), CountingOracle(BruteForceOracle(SEG))


def test_embedding_vertices():
    pc = PolicyClass([[0, 1, 1], [1, 1, 0]], 2)
    emb = HullEmbedding(pc, [2, 0, 2])
    assert emb.contexts.tolist() == [0, 2] and emb.dim == 4
    np.testing.assert_array_equal(emb.vertex(0), [1, 0, 0, 1])
    np.testing.assert_array_equal(emb.vertices(), [[1, 0, 0, 1], [0, 1, 1, 0]])
    np.testing.assert_allclose(emb.point_of(PolicyDistribution([0.25, 0.75])), [0.25, 0.75, 0.75, 0.25])


def test_linopt_examples():
    emb, o = seg()
    idx, z, score = linopt_over_hull(np.array([1.0, 0.0]), emb, o)
    assert (idx, score) == (0, 1.0) and o.count == 1
    pc = PolicyClass([[0, 1], [1, 0], [1, 1]], 2)
    emb2 = HullEmbedding(pc, [0, 1])
    idx, _, score = linopt_over_hull(np.ones(4), emb2, BruteForceOracle(pc))
    assert idx == 0 and score == 2.0


def test_linopt_offset():
    emb, o = seg()
    w = np.array([3.0, 4.0])
    idx, z, score = linopt_over_hull(w, emb, o, delta_offset=0.1)
    np.testing.assert_allclose(z, [0.06, 1.08])
    assert score == pytest.approx(4.0 + 0.5)
    _, z0, _ = linopt_over_hull(np.zeros(2), emb, o, delta_offset=0.1)
    assert z0.tolist() in ([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ParameterError):
        linopt_over_hull(np.zeros(3), emb, o)


def test_membership_midpoint():
    emb, o = seg()
    res = hull_membership(np.array([0.5, 0.5]), 0.01, emb, o)
    assert isinstance(res, InHull)
    np.testing.assert_allclose(res.P.weights, [0.5, 0.5], atol=1e-12)


def test_membership_separates_outside_point():
    emb, o = seg()
    W = np.array([0.9, 0.3])
    _, dist = project_onto_vertices(W, emb.vertices())
    assert dist == pytest.approx(0.2 / np.sqrt(2))
    res = hull_membership(W, 0.01, emb, o)
    assert isinstance(res, Hyperplane)
    assert res.side(W) > 0
    for v in emb.vertices():
        assert res.side(v) < -1e-9


def test_membership_vertex_is_point_mass():
    pc = PolicyClass([[0, 1], [1, 0], [1, 1]], 2)
    emb = HullEmbedding(pc, [0, 1])
    res = hull_membership(emb.vertex(2), 0.05, emb, BruteForceOracle(pc))
    assert isinstance(res, InHull) and res.P.weights.tolist() == [0.0, 0.0, 1.0]


def test_projection_matches_scipy_qp(rng):
    from scipy.optimize import minimize

    for _ in range(5):
        V = rng.integers(0, 2, (6, 5)).astype(float)
        W = rng.normal(0.5, 0.5, 5)
        wts, dist = project_onto_vertices(W, V)
        res = minimize(lambda l: np.sum((l @ V - W) ** 2), np.full(6, 1 / 6), method="SLSQP",
                       bounds=[(0, 1)] * 6, constraints=[{"type": "eq", "fun": lambda l: l.sum() - 1}],
                       options={"ftol": 1e-14, "maxiter": 500})
        assert dist == pytest.approx(np.sqrt(res.fun), abs=1e-6)
        assert wts.sum() == pytest.approx(1.0) and wts.min() >= 0


@pytest.mark.parametrize("seed", range(4))
def test_hyperplanes_verifiably_separate(seed):
    rng = np.random.default_rng(seed)
    K = 2 + seed % 2
    pc = random_class(rng, 10, 3, K)
    emb = HullEmbedding(pc, range(3))
    o = BruteForceOracle(pc)
    V = emb.vertices()
    delta = 0.02
    for _ in range(100):
        W = rng.dirichlet(np.ones(10)) @ V + rng.normal(0, 0.15, emb.dim)
        res = hull_membership(W, delta, emb, o)
        if isinstance(res, Hyperplane):
            assert res.side(W) > 0
            assert np.all(V @ res.normal - res.offset < -1e-9)
        else:
            assert np.linalg.norm(emb.point_of(res.P) - W) <= 2 * delta + 1e-12
