"""Episode runner, baselines and regret accounting."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..amo import BruteForceOracle
from ..concentration import pe_schedule
from ..core import FiniteEnvironment, PolicyClass
from ..elimination import (PeState, delayed_pe_update, delayed_round, pe_choose, pe_update)
from ..errors import BanditError, EpisodeError, ParameterError
from ..rucb import RucbState, rucb_choose, rucb_update
from .rng import Streams

TRANSCRIPT_COLUMNS = ("t", "x", "a", "p", "r", "cum_regret", "mu_t", "schedule_stat", "support")


@dataclass
class Transcript:
    algorithm: str
    tau: int
    seed: int
    best_value: float
    t: np.ndarray
    x: np.ndarray
    a: np.ndarray
    p: np.ndarray
    r: np.ndarray
    cum_regret: np.ndarray
    mu_t: np.ndarray
    schedule_stat: np.ndarray
    support: np.ndarray
    info: Dict[str, object] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return int(self.t.size)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if self.T else 0.0

    @property
    def cumulative_reward(self) -> float:
        return float(self.r.sum())


def compute_regret(rewards: Sequence[float], best_value: float) -> np.ndarray:
    """Prefix sums of best_value - r_t."""
    return np.cumsum(best_value - np.asarray(rewards, dtype=float))


def eps_greedy_rate(t: int, K: int) -> float:
    return min(1.0, (K * math.log(t) / t) ** (1.0 / 3.0))


def eps_greedy_step(greedy_action: int, K: int, eps: float, rng: np.random.Generator) -> Tuple[int, float]:
    """Explore uniformly with probability eps, else play the greedy action; returns (a, p(a))."""
    if not 0.0 <= eps <= 1.0:
        raise ParameterError("exploration rate must lie in [0, 1]")
    probs = np.full(K, eps / K)
    probs[greedy_action] += 1.0 - eps
    a = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), K - 1)
    return a, float(probs[a])


# ---------------------------------------------------------------------------- agents


class Agent:
    """Learner interface used by the runner.

    ``act`` is called once per round, ``observe`` once per round after it with
    the reward that becomes visible this round (``None`` while the delay
    buffer fills).  ``stats`` describes the round just played.
    """

    name = "agent"

    def act(self, x: int, rng: np.random.Generator) -> Tuple[int, float]:
        raise NotImplementedError

    def observe(self, reward: Optional[float]) -> None:
        raise NotImplementedError

    def stats(self) -> Tuple[float, float, float]:
        return (math.nan, math.nan, math.nan)


class UniformAgent(Agent):
    name = "uniform"

    def __init__(self, K: int):
        self.K = K

    def act(self, x, rng):
        return int(rng.integers(self.K)), 1.0 / self.K

    def observe(self, reward):
        pass


class EpsGreedyAgent(Agent):
    name = "eps_greedy"

    def __init__(self, pclass: PolicyClass):
        self.pclass = pclass
        self.sums = np.zeros(pclass.N)
        self.t = 0
        self.pending: deque = deque()
        self._eps = math.nan

    def act(self, x, rng):
        self.t += 1
        eps = eps_greedy_rate(self.t, self.pclass.K)
        lead = int(np.argmax(self.sums))
        a, p = eps_greedy_step(int(self.pclass.table[lead, x]), self.pclass.K, eps, rng)
        self.pending.append((x, a, p))
        self._eps = eps
        return a, p

    def observe(self, reward):
        if reward is None:
            return
        x, a, p = self.pending.popleft()
        self.sums += (self.pclass.table[:, x] == a) * (reward / p)

    def stats(self):
        return (math.nan, self._eps, math.nan)


class PeAgent(Agent):
    """Policy elimination; with ``delayed`` the schedules follow round max(t - tau, 1)."""

    def __init__(self, pclass: PolicyClass, context_probs, delta: float, tau: int = 0, delayed: bool = False):
        self.state = PeState(pclass, context_probs, delta)
        self.tau = tau
        self.sched_tau = tau if delayed else 0
        self.name = "delayed_pe" if delayed else "pe"
        self._sched = None
        self._support = 0

    def act(self, x, rng):
        st = self.state
        t = st.t + 1
        self._sched = pe_schedule(delayed_round(t, self.sched_tau), st.N, st.K, st.delta)
        self._support = int(st.active.size)
        a, p = pe_choose(st, x, self._sched, rng)
        st.pending.append((int(x), a, p))
        return a, p

    def observe(self, reward):
        st = self.state
        if self.tau == 0 and self.sched_tau == 0:
            x, a, p = st.pending.popleft()
            pe_update(st, x, a, reward, p, self._sched)
        else:
            delayed_pe_update(st, reward, self.sched_tau)

    def stats(self):
        return (self._sched.mu_t, self._sched.b_t, float(self._support))


class RucbAgent(Agent):
    name = "rucb"

    def __init__(self, pclass: PolicyClass, delta: float, method: str = "auto", tol: Optional[float] = None):
        self.state = RucbState(pclass, BruteForceOracle(pclass), delta, method=method, tol=tol)
        self.pending: deque = deque()
        self._sched = None
        self._support = 0

    def act(self, x, rng):
        st = self.state
        self._sched = st.schedule(len(st.history) + 1)
        a, p = rucb_choose(st, x, self._sched, rng)
        self._support = int(st.last_P.support.size)
        self.pending.append((int(x), a, p))
        return a, p

    def observe(self, reward):
        if reward is None:
            return
        x, a, p = self.pending.popleft()
        rucb_update(self.state, x, a, reward, p)

    def stats(self):
        return (self._sched.mu_t, self._sched.C_t, float(self._support))


def make_agent(algorithm: str, env: FiniteEnvironment, pclass: PolicyClass, delta: float, tau: int,
               rucb_method: str = "auto", rucb_tol: Optional[float] = None) -> Agent:
    if algorithm == "pe":
        return PeAgent(pclass, env.context_probs, delta, tau, delayed=False)
    if algorithm == "delayed_pe":
        return PeAgent(pclass, env.context_probs, delta, tau, delayed=True)
    if algorithm == "rucb":
        return RucbAgent(pclass, delta, rucb_method, rucb_tol)
    if algorithm == "eps_greedy":
        return EpsGreedyAgent(pclass)
    if algorithm == "uniform":
        return UniformAgent(pclass.K)
    raise ParameterError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------------------- runner


def run_episode(env: FiniteEnvironment, pclass: PolicyClass, algorithm: str, T: int, delta: float,
                seed: int, tau: int = 0, rucb_method: str = "auto", rucb_tol: Optional[float] = None,
                agent: Optional[Agent] = None) -> Transcript:
    """Play ``T`` rounds; the reward of round t becomes visible at round t + tau."""
    if T < 1:
        raise ParameterError("T must be positive")
    if tau < 0:
        raise ParameterError("delay must be non-negative")
    if env.K != pclass.K or env.n_contexts != pclass.n_contexts:
        raise ParameterError("environment and policy class disagree on contexts or actions")
    agent = agent or make_agent(algorithm, env, pclass, delta, tau, rucb_method, rucb_tol)
    streams = Streams(seed)
    best = float(env.policy_values(pclass).max())
    cols = {c: np.full(T, np.nan) for c in TRANSCRIPT_COLUMNS}
    ints = {c: np.zeros(T, dtype=np.int64) for c in ("t", "x", "a")}
    fifo: deque = deque()

    def partial(n):
        return _make_transcript(algorithm, tau, seed, best, ints, cols, n, agent)

    for i in range(T):
        t = i + 1
        x, rvec = env.sample(streams.env(t))
        try:
            a, p = agent.act(x, streams.algo(t))
            r = float(rvec[a])
            fifo.append(r)
            agent.observe(fifo.popleft() if len(fifo) > tau else None)
        except BanditError as exc:
            raise EpisodeError(f"{algorithm} failed at round {t}: {exc}", round=t, transcript=partial(i)) from exc
        ints["t"][i], ints["x"][i], ints["a"][i] = t, x, a
        cols["p"][i], cols["r"][i] = p, r
        cols["mu_t"][i], cols["schedule_stat"][i], cols["support"][i] = agent.stats()
    return partial(T)


def _make_transcript(algorithm, tau, seed, best, ints, cols, n, agent) -> Transcript:
    r = cols["r"][:n]
    info: Dict[str, object] = {}
    if isinstance(agent, PeAgent):
        info["active"] = agent.state.active.copy()
    return Transcript(algorithm, tau, seed, best, ints["t"][:n], ints["x"][:n], ints["a"][:n],
                      cols["p"][:n], r, compute_regret(r, best), cols["mu_t"][:n],
                      cols["schedule_stat"][:n], cols["support"][:n], info)


# ---------------------------------------------------------------------------- bounds


def regret_bound(algorithm: str, T: int, K: int, N: int, delta: float, tau: int = 0) -> float:
    """Reference regret ceiling reported next to each run (NaN for baselines)."""
    if algorithm in ("pe", "delayed_pe"):
        per = 16.0 * math.sqrt(2.0 * K * math.log(4.0 * T * T * N / delta))
        if algorithm == "pe" or tau == 0:
            return per * math.sqrt(T)
        return per * (tau + math.sqrt(T))
    if algorithm == "rucb":
        return math.sqrt(T * K * math.log(T * N / delta)) + K * math.log(N * K / delta)
    return math.nan


def fmt_float(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return "%.17g" % v


def transcript_rows(tr: Transcript) -> List[List[str]]:
    rows = []
    for i in range(tr.T):
        sup = tr.support[i]
        rows.append([str(int(tr.t[i])), str(int(tr.x[i])), str(int(tr.a[i])), fmt_float(tr.p[i]),
                     fmt_float(tr.r[i]), fmt_float(tr.cum_regret[i]), fmt_float(tr.mu_t[i]),
                     fmt_float(tr.schedule_stat[i]), "" if math.isnan(sup) else str(int(sup))])
    return rows
