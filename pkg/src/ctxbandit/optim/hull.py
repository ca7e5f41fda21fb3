"""Geometry of the policy hull.

Policies are embedded as 0/1 vectors indexed by (observed context, action):
coordinate ``(i, a)`` of policy ``pi`` is 1 when ``pi(contexts[i]) == a``.
The convex hull C of these vertices is the set of randomized policies
restricted to the observed contexts, and C_delta is its delta-neighbourhood.
Linear optimization over C is one argmax-oracle call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ..amo import AmoDataset
from ..core import PolicyClass, PolicyDistribution
from ..errors import NumericalError, ParameterError
from .ellipsoid import Hyperplane

HULL_C = 10.0


class HullEmbedding:
    """Vertex embedding of a policy class over a fixed list of distinct contexts."""

    def __init__(self, pclass: PolicyClass, contexts: Sequence[int]):
        cs = np.unique(np.asarray(contexts, dtype=np.int64))
        if cs.size == 0:
            raise ParameterError("embedding needs at least one context")
        for x in cs:
            pclass.check_context(int(x))
        self.pclass = pclass
        self.contexts = cs
        self.K = pclass.K
        self.m = cs.size
        self.dim = self.m * self.K

    def vertex(self, i: int) -> np.ndarray:
        v = np.zeros((self.m, self.K))
        v[np.arange(self.m), self.pclass.table[i, self.contexts]] = 1.0
        return v.ravel()

    def vertices(self, idx: Optional[Sequence[int]] = None) -> np.ndarray:
        idx = np.arange(self.pclass.N) if idx is None else np.asarray(idx, dtype=np.int64)
        V = np.zeros((idx.size, self.m, self.K))
        V[np.arange(idx.size)[:, None], np.arange(self.m)[None, :], self.pclass.table[idx][:, self.contexts]] = 1.0
        return V.reshape(idx.size, self.dim)

    def point_of(self, P: PolicyDistribution) -> np.ndarray:
        sup = P.support
        return P.weights[sup] @ self.vertices(sup)

    def dataset(self, w: np.ndarray) -> AmoDataset:
        return AmoDataset(self.contexts, np.asarray(w, dtype=float).reshape(self.m, self.K))

    def center(self) -> np.ndarray:
        """The uniform randomized policy; every vertex is at distance sqrt(m (1 - 1/K)) from it."""
        return np.full(self.dim, 1.0 / self.K)

    def radius(self) -> float:
        return math.sqrt(self.m * (1.0 - 1.0 / self.K))


def linopt_over_hull(w, emb: HullEmbedding, oracle, delta_offset: float = 0.0) -> Tuple[int, np.ndarray, float]:
    """argmax_{Z in C_delta} w . Z with one oracle call.

    Returns the maximizing policy index, the maximizer and its score.  With a
    positive offset the maximizer is the vertex shifted by delta w/|w|; for
    w = 0 the offset direction is undefined and the bare vertex is returned.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (emb.dim,):
        raise ParameterError(f"coefficient vector must have dimension {emb.dim}")
    idx, score = oracle(emb.dataset(w))
    z = emb.vertex(idx)
    nw = float(np.linalg.norm(w))
    if delta_offset > 0 and nw > 0:
        z = z + (delta_offset / nw) * w
        score = score + delta_offset * nw
    return idx, z, float(score)


# ------------------------------------------------------------------ min-norm point


def _affine_minimizer(S: np.ndarray) -> np.ndarray:
    """Coefficients alpha (sum 1) of the min-norm point of aff(rows of S)."""
    k = S.shape[0]
    G = S @ S.T
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = G
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def _corral_step(S: np.ndarray, lam: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Wolfe minor cycle: move to the min-norm point of conv(S), dropping vertices as needed."""
    keep = np.arange(S.shape[0])
    for _ in range(4 * S.shape[0] + 10):
        alpha = _affine_minimizer(S[keep])
        if np.all(alpha > tol):
            lam = np.zeros_like(lam)
            lam[keep] = alpha
            return lam, keep
        cur = lam[keep]
        neg = alpha <= tol
        diff = cur[neg] - alpha[neg]
        ratios = np.where(diff > 0, cur[neg] / np.where(diff > 0, diff, 1.0), np.inf)
        theta = min(1.0, float(ratios.min()))
        new = (1.0 - theta) * cur + theta * alpha
        new[new <= tol] = 0.0
        lam = np.zeros_like(lam)
        lam[keep] = new
        keep = keep[new > 0]
        if keep.size == 0:
            raise NumericalError("min-norm corral became empty")
        lam[keep] /= lam[keep].sum()
        if keep.size == 1:
            lam = np.zeros_like(lam)
            lam[keep] = 1.0
            return lam, keep
    raise NumericalError("min-norm minor cycle did not settle")


def project_onto_vertices(W, V: np.ndarray, tol: float = 1e-8, max_iter: int = 10_000) -> Tuple[np.ndarray, float]:
    """Euclidean projection of ``W`` onto conv(rows of V); returns (weights, distance).

    Wolfe's minimum-norm-point method on the shifted vertices V - W.
    """
    W = np.asarray(W, dtype=float)
    V = np.asarray(V, dtype=float)
    X = V - W
    j = int(np.argmin((X * X).sum(axis=1)))
    corral = [j]
    lam = np.array([1.0])
    for _ in range(max_iter):
        S = X[corral]
        p = lam @ S
        scores = X @ p
        j = int(np.argmin(scores))
        if p @ p - scores[j] <= tol * max(1.0, p @ p) or j in corral:
            break
        corral.append(j)
        lam = np.append(lam, 0.0)
        lam, keep = _corral_step(X[corral], lam, 1e-14)
        corral = [corral[k] for k in keep]
        lam = lam[keep]
    else:
        raise NumericalError("projection onto hull did not converge")
    weights = np.zeros(V.shape[0])
    weights[corral] = lam
    p = lam @ X[corral]
    return weights, float(np.linalg.norm(p))


# --------------------------------------------------------------------- membership


@dataclass
class InHull:
    P: PolicyDistribution
    point: np.ndarray  # W_P on the embedding
    distance: float
    iterations: int


HullResult = Union[InHull, Hyperplane]


def hull_iteration_cap(m: int, delta: float, c: float = HULL_C) -> int:
    return math.ceil(c * (m + 1) / (delta * delta))


def hull_membership(W, delta: float, emb: HullEmbedding, oracle, max_iter: Optional[int] = None) -> HullResult:
    """Decide W in C_{2 delta} or separate W from C_delta.

    A fully-corrective perceptron: each step queries the oracle for the vertex
    most aligned with the residual W - p (p the current projection onto the
    vertices found so far), then re-projects.  On success the returned
    distribution satisfies |W_P - W| <= 2 delta; otherwise the hyperplane has
    C_delta on its non-positive side and W strictly on the positive side.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive")
    W = np.asarray(W, dtype=float)
    if W.shape != (emb.dim,):
        raise ParameterError(f"point must have dimension {emb.dim}")
    cap = hull_iteration_cap(emb.m, delta) if max_iter is None else max_iter

    idx0, _ = oracle(emb.dataset(W))
    found = [idx0]
    verts = [emb.vertex(idx0)]
    lam = np.array([1.0])
    for it in range(1, cap + 1):
        X = np.array(verts) - W
        p_shift = lam @ X
        d = -p_shift  # residual W - p
        dist = float(np.linalg.norm(d))
        if dist <= 2.0 * delta:
            wts = np.zeros(emb.pclass.N)
            np.add.at(wts, found, lam)
            P = PolicyDistribution(wts / wts.sum())
            return InHull(P, W - d, dist, it)
        j, zj, score = linopt_over_hull(d, emb, oracle)
        offset = score + delta * dist
        if offset < float(d @ W):
            return Hyperplane(d, offset)
        if j in found:
            # The projection is already optimal over the whole hull, so the
            # distance certificate above must have fired.
            raise NumericalError("hull membership stalled", {"distance": dist, "delta": delta})
        found.append(j)
        verts.append(zj)
        lam = np.append(lam, 0.0)
        lam, keep = _corral_step(np.array(verts) - W, lam, 1e-14)
        found = [found[k] for k in keep]
        verts = [verts[k] for k in keep]
        lam = lam[keep]
    raise NumericalError("hull membership hit its iteration cap", {"cap": cap})
