"""Policy elimination and its delayed-feedback variant.

Each round the learner picks a distribution over the surviving policies whose
smoothed action distribution keeps the importance weights of *every* surviving
policy small on average over contexts, plays from it, and then discards
policies whose IPS estimate falls more than ``2 b_t`` below the leader.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np

from .concentration import PeSchedule, pe_schedule
from .core import HistoryRecord, PolicyClass, PolicyDistribution
from .errors import ConvergenceError, DomainError, ParameterError

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
MAX_ITER = 100_000


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class _Potential:
    """Phi(P) = max_i E_x[1 / W'(x, pi_i(x))] restricted to a fixed active set."""

    def __init__(self, table: np.ndarray, context_probs: np.ndarray, mu: float, K: int):
        # agree[x, i, j] = 1 when policies i and j pick the same action at x
        self.agree = (table.T[:, :, None] == table.T[:, None, :]).astype(float)
        self.D = np.asarray(context_probs, dtype=float)
        self.scale = 1.0 - K * mu
        self.mu = mu

    def values(self, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        W = self.agree @ p  # (X, m): W_P(x, pi_i(x))
        denom = self.scale * W + self.mu
        return self.D @ (1.0 / denom), denom

    def value_and_subgradient(self, p: np.ndarray) -> Tuple[float, np.ndarray]:
        vals, denom = self.values(p)
        i = int(np.argmax(vals))
        coef = self.D * self.scale / denom[:, i] ** 2  # (X,)
        grad = -(coef @ self.agree[:, i, :])
        return float(vals[i]), grad


def variance_levels(P: PolicyDistribution, pclass: PolicyClass, active: Sequence[int],
                    context_probs: np.ndarray, mu: float) -> np.ndarray:
    """E_x[1 / W'_P(x, pi(x))] for each active policy, using the full distribution ``P``."""
    from .core import induced_matrix

    W = induced_matrix(P, pclass)
    Wp = (1.0 - pclass.K * mu) * W + mu
    ctx = np.arange(pclass.n_contexts)
    act = np.asarray(active, dtype=np.int64)
    return (np.asarray(context_probs) / Wp[ctx, pclass.table[act]]).sum(axis=1)


def find_low_variance_dist(active: Sequence[int], pclass: PolicyClass, context_probs, mu: float,
                           tol: float = DEFAULT_TOL, warm_start: Optional[np.ndarray] = None,
                           max_iter: int = MAX_ITER) -> PolicyDistribution:
    """Distribution over ``active`` with max_pi E_x[1/W'(x, pi(x))] <= 2K + tol.

    Runs projected subgradient descent with Polyak steps aimed at the level
    K / (1 - K mu), which is always attainable, so the result usually meets
    that tighter level too.  ``warm_start`` is a weight vector over the whole
    class (mass outside ``active`` is dropped).
    """
    K = pclass.K
    if not 0.0 < mu <= 1.0 / (2 * K):
        raise ParameterError(f"mu={mu} must lie in (0, 1/(2K)]")
    act = np.array(sorted(set(int(i) for i in active)), dtype=np.int64)
    if act.size == 0:
        raise DomainError("active policy set is empty")
    if act[0] < 0 or act[-1] >= pclass.N:
        raise DomainError("active index outside the policy class")
    D = np.asarray(context_probs, dtype=float)
    if D.size != pclass.n_contexts:
        raise DomainError("context distribution does not match the policy class")

    def embed(p: np.ndarray) -> PolicyDistribution:
        w = np.zeros(pclass.N)
        w[act] = p
        return PolicyDistribution(w)

    if act.size == 1:
        return embed(np.ones(1))

    level = K / (1.0 - K * mu)
    ceiling = 2.0 * K + tol
    pot = _Potential(pclass.table[act], D, mu, K)

    p = None
    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=float)[act]
        if ws.sum() > 0:
            p = ws / ws.sum()
    if p is None:
        p = np.full(act.size, 1.0 / act.size)

    best_p, best_val = p, math.inf
    for it in range(max_iter):
        val, g = pot.value_and_subgradient(p)
        if val < best_val:
            best_p, best_val = p, val
        if val <= level + tol:
            break
        # Polyak step toward the attainable level; the gradient is projected on the
        # simplex tangent space so the step length is meaningful.
        g = g - g.mean()
        gg = float(g @ g)
        if gg <= 0.0:
            break
        step = (val - level + tol / 2) / gg
        p = project_simplex(p - step * g)
    if best_val > ceiling:
        raise ConvergenceError(f"low-variance search stalled at {best_val:.6g} > 2K", best_value=best_val)
    if best_val > level + tol:
        log.debug("low-variance search stopped at %.6g (level %.6g)", best_val, level)
    return embed(best_p)


# ----------------------------------------------------------------------------- state


@dataclass
class PeState:
    """Mutable per-run state; ``active`` holds indices into the shared policy class."""

    pclass: PolicyClass
    context_probs: np.ndarray
    delta: float
    active: np.ndarray = None
    history: List[HistoryRecord] = field(default_factory=list)
    t: int = 0  # completed rounds
    sums: np.ndarray = None  # unnormalized IPS sums for every policy
    last_P: Optional[PolicyDistribution] = None
    pending: Deque[Tuple[int, int, float]] = field(default_factory=deque)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        self.context_probs = np.asarray(self.context_probs, dtype=float)
        if self.context_probs.size != self.pclass.n_contexts:
            raise DomainError("context distribution does not match the policy class")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError("delta must lie in (0, 1)")
        if self.active is None:
            self.active = np.arange(self.pclass.N)
        if self.sums is None:
            self.sums = np.zeros(self.pclass.N)

    @property
    def N(self) -> int:
        return self.pclass.N

    @property
    def K(self) -> int:
        return self.pclass.K

    def estimates(self) -> np.ndarray:
        n = len(self.history)
        return self.sums / n if n else np.zeros(self.N)

    def schedule(self, t: int) -> PeSchedule:
        return pe_schedule(t, self.N, self.K, self.delta)


def _sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    a = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return min(a, probs.size - 1)


def pe_distribution(state: PeState, schedule: PeSchedule) -> Tuple[PolicyDistribution, np.ndarray]:
    """Step 1 distribution for the current active set, plus its full smoothed action table."""
    from .core import induced_matrix

    warm = state.last_P.weights if state.last_P is not None else None
    P = find_low_variance_dist(state.active, state.pclass, state.context_probs, schedule.mu_t,
                               tol=state.tol, warm_start=warm)
    Wp = (1.0 - state.K * schedule.mu_t) * induced_matrix(P, state.pclass) + schedule.mu_t
    return P, Wp


def pe_choose(state: PeState, x_t: int, schedule: PeSchedule, rng: np.random.Generator) -> Tuple[int, float]:
    if state.active.size == 0:
        raise DomainError("no active policies left")
    state.pclass.check_context(x_t)
    P, Wp = pe_distribution(state, schedule)
    state.last_P = P
    probs = Wp[x_t]
    a = _sample(probs, rng)
    return a, float(probs[a])


def _eliminate(state: PeState, b: float) -> None:
    eta = state.estimates()[state.active]
    keep = eta >= eta.max() - 2.0 * b
    state.active = state.active[keep]


def pe_update(state: PeState, x_t: int, a_t: int, r_t: float, p_t: float, schedule: PeSchedule) -> PeState:
    rec = HistoryRecord(int(x_t), int(a_t), float(r_t), float(p_t))
    state.history.append(rec)
    state.sums += (state.pclass.table[:, rec.x] == rec.a) * (rec.r / rec.p)
    state.t += 1
    _eliminate(state, schedule.b_t)
    return state


# --------------------------------------------------------------------------- delayed


def delayed_round(t: int, tau: int) -> int:
    """Schedule index t' = max(t - tau, 1)."""
    if tau < 0:
        raise ParameterError("delay must be non-negative")
    return max(t - tau, 1)


def delayed_pe_choose(state: PeState, x_t: int, tau: int, rng: np.random.Generator) -> Tuple[int, float]:
    """Act in round ``state.t + 1`` using the schedule of round max(t - tau, 1)."""
    sched = state.schedule(delayed_round(state.t + 1, tau))
    a, p = pe_choose(state, x_t, sched, rng)
    state.pending.append((int(x_t), a, p))
    return a, p


def delayed_pe_update(state: PeState, revealed: Optional[float], tau: int) -> PeState:
    """Close the current round; ``revealed`` is the reward of the oldest pending action, if due.

    Elimination only happens on rounds where a reward arrives, and it uses the
    estimate over revealed records with b at the delayed schedule index.
    """
    t = state.t + 1
    state.t = t
    if revealed is None:
        return state
    if not state.pending:
        raise DomainError("reward revealed with no pending action")
    x, a, p = state.pending.popleft()
    rec = HistoryRecord(x, a, float(revealed), p)
    state.history.append(rec)
    state.sums += (state.pclass.table[:, rec.x] == rec.a) * (rec.r / rec.p)
    _eliminate(state, state.schedule(delayed_round(t, tau)).b_t)
    return state
