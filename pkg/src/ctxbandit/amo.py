"""Argmax oracle: given rows (x, reward vector), return the policy with the largest total.

The oracle is the only way the optimization code touches the policy class, so
swapping in a structured learner only requires implementing ``__call__``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import HistoryRecord, PolicyClass
from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class AmoDataset:
    """Weighted cost-sensitive dataset; ``rewards`` may hold any real values."""

    contexts: np.ndarray  # (n,) int
    rewards: np.ndarray  # (n, K) float

    def __post_init__(self):
        ctx = np.asarray(self.contexts, dtype=np.int64).reshape(-1)
        rew = np.asarray(self.rewards, dtype=float)
        if ctx.size == 0 and rew.size == 0 and rew.ndim != 2:
            rew = rew.reshape(0, 0)
        if rew.ndim != 2 or rew.shape[0] != ctx.size:
            raise ParameterError("rewards must be an (n, K) array matching contexts")
        if not np.all(np.isfinite(rew)):
            raise ParameterError("rewards must be finite")
        object.__setattr__(self, "contexts", ctx)
        object.__setattr__(self, "rewards", rew)

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[int, Sequence[float]]], K: int | None = None) -> "AmoDataset":
        if not rows:
            return cls(np.zeros(0, dtype=np.int64), np.zeros((0, K or 0)))
        ctx = [int(x) for x, _ in rows]
        rew = np.array([np.asarray(r, dtype=float) for _, r in rows])
        if K is not None and rew.shape[1] != K:
            raise ParameterError("reward vectors do not have K entries")
        return cls(np.array(ctx), rew)

    @classmethod
    def from_history(cls, history: Sequence[HistoryRecord], K: int) -> "AmoDataset":
        """IPS rows: r I(a = a_t) / p_t, one row per record."""
        n = len(history)
        ctx = np.fromiter((h.x for h in history), dtype=np.int64, count=n)
        rew = np.zeros((n, K))
        for i, h in enumerate(history):
            rew[i, h.a] = h.r / h.p
        return cls(ctx, rew)

    def __len__(self) -> int:
        return self.contexts.size

    def aggregated(self) -> "AmoDataset":
        """Sum rows that share a context; scores of every policy are unchanged."""
        if len(self) == 0:
            return self
        uniq, inv = np.unique(self.contexts, return_inverse=True)
        agg = np.zeros((uniq.size, self.rewards.shape[1]))
        np.add.at(agg, inv, self.rewards)
        return AmoDataset(uniq, agg)


def policy_scores(ds: AmoDataset, pclass: PolicyClass) -> np.ndarray:
    """Total reward of every policy on ``ds`` (vector of length N)."""
    if len(ds) == 0:
        return np.zeros(pclass.N)
    if ds.rewards.shape[1] != pclass.K:
        raise DomainError("dataset K differs from the policy class")
    if ds.contexts.min() < 0 or ds.contexts.max() >= pclass.n_contexts:
        raise DomainError("dataset refers to an unknown context id")
    chosen = pclass.table[:, ds.contexts]  # (N, n)
    return ds.rewards[np.arange(len(ds)), chosen].sum(axis=1)


class BruteForceOracle:
    """Reference oracle enumerating the whole class; exact, O(N * rows)."""

    def __init__(self, pclass: PolicyClass):
        if pclass.N == 0:
            raise DomainError("empty policy class")
        self.pclass = pclass

    def __call__(self, ds: AmoDataset) -> Tuple[int, float]:
        if len(ds) == 0:
            return 0, 0.0
        scores = policy_scores(ds.aggregated(), self.pclass)
        i = int(np.argmax(scores))  # first maximum -> lowest index
        return i, float(scores[i])


def amo_argmax(ds: AmoDataset, pclass: PolicyClass) -> Tuple[int, float]:
    if pclass is None or pclass.N == 0:
        raise DomainError("empty policy class")
    return BruteForceOracle(pclass)(ds)


class CountingOracle:
    """Wrap an oracle and count its invocations; the count is exact under threads."""

    def __init__(self, oracle):
        self._inner = oracle
        self._lock = threading.Lock()
        self._count = 0

    @property
    def pclass(self) -> PolicyClass:
        return self._inner.pclass

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __call__(self, ds: AmoDataset) -> Tuple[int, float]:
        with self._lock:
            self._count += 1
        return self._inner(ds)


def amo_call_counter(oracle) -> CountingOracle:
    return oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)
