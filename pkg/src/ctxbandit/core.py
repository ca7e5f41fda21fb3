"""Domain types and importance-weighted estimators for finite contextual bandits.

Contexts are integer ids ``0 .. n_contexts-1`` and actions are integers
``0 .. K-1``.  A policy class is an explicit, ordered list of deterministic
policies stored as an ``(N, n_contexts)`` integer table; every index into the
class is stable for the lifetime of a run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, ParameterError

SIMPLEX_TOL = 1e-9


def _as_simplex(values, tol: float, what: str) -> np.ndarray:
    """Validate a probability vector, renormalizing it when within ``tol`` of the simplex."""
    v = np.array(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ParameterError(f"{what} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ParameterError(f"{what} has non-finite entries")
    if v.min() < -tol:
        raise ParameterError(f"{what} has a negative entry {v.min():.3g}")
    total = v.sum()
    if abs(total - 1.0) > tol:
        raise ParameterError(f"{what} sums to {total!r}, not 1")
    v = np.clip(v, 0.0, None)
    v /= v.sum()
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class Policy:
    """Deterministic map from context id to action id."""

    action_of: Tuple[int, ...]

    def __call__(self, x: int) -> int:
        try:
            return self.action_of[x]
        except IndexError:
            raise DomainError(f"unknown context id {x}") from None


class PolicyClass:
    """Finite, ordered policy class over a shared context space and action set."""

    def __init__(self, table, K: int):
        tab = np.array(table, dtype=np.int64)
        if tab.ndim != 2 or tab.shape[0] == 0 or tab.shape[1] == 0:
            raise DomainError("policy table must be a non-empty (N, n_contexts) array")
        if K < 1:
            raise ParameterError("K must be positive")
        if tab.min() < 0 or tab.max() >= K:
            raise DomainError("policy actions must lie in 0..K-1")
        tab.setflags(write=False)
        self.table = tab
        self.K = int(K)

    @classmethod
    def from_policies(cls, policies: Sequence[Union[Policy, Sequence[int]]], K: int) -> "PolicyClass":
        rows = [p.action_of if isinstance(p, Policy) else tuple(p) for p in policies]
        if not rows:
            raise DomainError("a policy class needs at least one policy")
        if len({len(r) for r in rows}) != 1:
            raise DomainError("all policies must share the same context space")
        return cls(rows, K)

    @classmethod
    def all_maps(cls, n_contexts: int, K: int) -> "PolicyClass":
        """Every deterministic map from ``n_contexts`` contexts to ``K`` actions (K**n policies)."""
        grids = np.indices((K,) * n_contexts).reshape(n_contexts, -1).T
        return cls(grids, K)

    @property
    def N(self) -> int:
        return self.table.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.table.shape[1]

    @property
    def context_space(self) -> range:
        return range(self.n_contexts)

    @property
    def policies(self) -> list:
        return [Policy(tuple(int(a) for a in row)) for row in self.table]

    def __len__(self) -> int:
        return self.N

    def __getitem__(self, i: int) -> Policy:
        return Policy(tuple(int(a) for a in self.table[i]))

    def check_context(self, x: int) -> None:
        if not 0 <= x < self.n_contexts:
            raise DomainError(f"unknown context id {x}")

    def __repr__(self) -> str:
        return f"PolicyClass(N={self.N}, K={self.K}, n_contexts={self.n_contexts})"


@dataclass(frozen=True)
class HistoryRecord:
    """One logged interaction: context, action, observed reward, logging probability."""

    x: int
    a: int
    r: float
    p: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ParameterError(f"reward {self.r} outside [0, 1]")
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"probability {self.p} outside (0, 1]")


@dataclass(frozen=True)
class PolicyDistribution:
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_simplex(self.weights, SIMPLEX_TOL, "policy distribution"))

    @classmethod
    def point_mass(cls, i: int, N: int) -> "PolicyDistribution":
        w = np.zeros(N)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, N: int, support: Optional[Iterable[int]] = None) -> "PolicyDistribution":
        w = np.zeros(N)
        idx = np.arange(N) if support is None else np.fromiter(support, dtype=np.int64)
        w[idx] = 1.0 / len(idx)
        return cls(w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class ActionDistribution:
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_simplex(self.probs, SIMPLEX_TOL, "action distribution"))

    @property
    def K(self) -> int:
        return self.probs.size

    def __getitem__(self, a: int) -> float:
        return float(self.probs[a])


class FiniteEnvironment:
    """Explicit joint law over (context, reward vector).

    ``context_probs`` is the marginal over contexts; ``reward_means[x, a]`` is
    the mean reward of action ``a`` in context ``x``.  With ``law="bernoulli"``
    each reward is an independent Bernoulli draw with that mean, with
    ``law="deterministic"`` the reward equals the mean.
    """

    LAWS = ("bernoulli", "deterministic")

    def __init__(self, context_probs, reward_means, law: str = "bernoulli", names: Optional[Sequence[str]] = None):
        probs = np.array(context_probs, dtype=float)
        means = np.array(reward_means, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ParameterError("context_probs must be a non-empty vector")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ParameterError(f"context probabilities must be non-negative and sum to 1 (got {probs.sum()!r})")
        if means.ndim != 2 or means.shape[0] != probs.size:
            raise ParameterError("reward_means must have one row per context")
        if means.shape[1] < 1:
            raise ParameterError("need at least one action")
        if np.any(means < 0) or np.any(means > 1):
            raise ParameterError("reward means must lie in [0, 1]")
        if law not in self.LAWS:
            raise ParameterError(f"unknown reward law {law!r}")
        probs.setflags(write=False)
        means.setflags(write=False)
        self.context_probs = probs
        self.reward_means = means
        self.law = law
        self.names = list(names) if names is not None else [f"x{i}" for i in range(probs.size)]
        self._cdf = np.cumsum(probs)

    @property
    def K(self) -> int:
        return self.reward_means.shape[1]

    @property
    def n_contexts(self) -> int:
        return self.context_probs.size

    def sample(self, rng: np.random.Generator) -> Tuple[int, np.ndarray]:
        """Draw one ``(x, reward_vector)`` pair."""
        x = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        x = min(x, self.n_contexts - 1)
        means = self.reward_means[x]
        if self.law == "deterministic":
            return x, means.copy()
        return x, (rng.random(self.K) < means).astype(float)

    def policy_values(self, pclass: PolicyClass) -> np.ndarray:
        """Exact expected reward of every policy in the class."""
        ctx = np.arange(self.n_contexts)
        return (self.reward_means[ctx, pclass.table] * self.context_probs).sum(axis=1)

    def best_value(self, pclass: PolicyClass) -> Tuple[int, float]:
        vals = self.policy_values(pclass)
        i = int(np.argmax(vals))
        return i, float(vals[i])

    def __repr__(self) -> str:
        return f"FiniteEnvironment(n_contexts={self.n_contexts}, K={self.K}, law={self.law!r})"


# --------------------------------------------------------------------------- operations


def induced_matrix(P: PolicyDistribution, pclass: PolicyClass) -> np.ndarray:
    """The full ``(n_contexts, K)`` table of W_P(x, a) = sum of P over policies choosing a at x."""
    if len(P) != pclass.N:
        raise DomainError("distribution and policy class have different sizes")
    W = np.zeros((pclass.n_contexts, pclass.K))
    ctx = np.broadcast_to(np.arange(pclass.n_contexts), pclass.table.shape)
    np.add.at(W, (ctx, pclass.table), P.weights[:, None])
    return W


def induced_action_dist(P: PolicyDistribution, pclass: PolicyClass, x: int) -> ActionDistribution:
    pclass.check_context(x)
    if len(P) != pclass.N:
        raise DomainError("distribution and policy class have different sizes")
    probs = np.bincount(pclass.table[:, x], weights=P.weights, minlength=pclass.K)
    return ActionDistribution(probs)


def smooth(W_row: ActionDistribution, mu: float, K: int) -> ActionDistribution:
    """Mix with the uniform distribution so every action has probability at least ``mu``."""
    if not 0.0 <= mu <= 1.0 / K:
        raise ParameterError(f"smoothing mu={mu} must lie in [0, 1/K]")
    probs = W_row.probs if isinstance(W_row, ActionDistribution) else np.asarray(W_row, dtype=float)
    if probs.size != K:
        raise ParameterError("row length differs from K")
    return ActionDistribution((1.0 - K * mu) * probs + mu)


def ips_policy_value(history: Sequence[HistoryRecord], policy: Union[Policy, Callable[[int], int]]) -> float:
    """Inverse-propensity estimate (1/t) sum r 1[pi(x)=a] / p; zero for an empty history."""
    if not history:
        return 0.0
    total = sum(rec.r / rec.p for rec in history if policy(rec.x) == rec.a)
    return total / len(history)


def ips_randomized_value(history: Sequence[HistoryRecord], W) -> float:
    """IPS estimate of a randomized policy; ``W`` is a callable ``W(x, a)`` or a (contexts, K) array."""
    if not history:
        return 0.0
    if callable(W):
        total = sum(rec.r * W(rec.x, rec.a) / rec.p for rec in history)
    else:
        W = np.asarray(W, dtype=float)
        total = sum(rec.r * W[rec.x, rec.a] / rec.p for rec in history)
    return total / len(history)


def ips_sums(history: Sequence[HistoryRecord], pclass: PolicyClass) -> np.ndarray:
    """Unnormalized IPS sums for every policy in the class (vectorized)."""
    out = np.zeros(pclass.N)
    for rec in history:
        out += (pclass.table[:, rec.x] == rec.a) * (rec.r / rec.p)
    return out


def empirical_best(history: Sequence[HistoryRecord], pclass: PolicyClass, oracle=None) -> Tuple[int, float]:
    """Empirically best policy pi_t and its IPS value, computed with one argmax-oracle call.

    Ties go to the lowest policy index; an empty history gives ``(0, 0.0)``.
    """
    from .amo import AmoDataset, BruteForceOracle

    if pclass.N == 0:
        raise DomainError("empty policy class")
    oracle = oracle if oracle is not None else BruteForceOracle(pclass)
    if not history:
        return 0, 0.0
    ds = AmoDataset.from_history(history, pclass.K).aggregated()
    idx, score = oracle(ds)
    return idx, score / len(history)


def true_value(env: FiniteEnvironment, policy: Union[Policy, Sequence[int]]) -> float:
    actions = policy.action_of if isinstance(policy, Policy) else policy
    if len(actions) != env.n_contexts:
        raise DomainError("policy and environment have different context spaces")
    return float(sum(env.context_probs[x] * env.reward_means[x, a] for x, a in enumerate(actions)))


def sparsify(P: PolicyDistribution, m: int, rng: np.random.Generator) -> PolicyDistribution:
    """Average of ``m`` point masses on policies drawn i.i.d. from ``P``."""
    if m < 1:
        raise ParameterError("m must be at least 1")
    draws = rng.choice(len(P), size=m, p=P.weights)
    counts = np.bincount(draws, minlength=len(P))
    return PolicyDistribution(counts / m)


def sparsify_size(gamma: float, mu: float) -> int:
    """Sample count ceil(6 / (gamma^2 mu)) that makes the sparsified variance proxy gamma-accurate."""
    if not (0 < gamma <= 1) or mu <= 0:
        raise ParameterError("need 0 < gamma <= 1 and mu > 0")
    return math.ceil(6.0 / (gamma * gamma * mu))
