"""Randomized UCB learner: re-solve the variance-constrained program every round."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .amo import AmoDataset, CountingOracle
from .concentration import RucbSchedule, rucb_schedule
from .core import HistoryRecord, PolicyClass, PolicyDistribution, induced_action_dist, smooth
from .errors import ParameterError
from .optim.program import RucbSolution, rucb_opt


@dataclass
class RucbState:
    pclass: PolicyClass
    oracle: object
    delta: float
    history: List[HistoryRecord] = field(default_factory=list)
    t: int = 0  # completed rounds
    last_P: Optional[PolicyDistribution] = None
    last_solution: Optional[RucbSolution] = None
    leader: Tuple[int, float] = (0, 0.0)  # (pi_t, eta_t(pi_t))
    _ips: Optional[np.ndarray] = None  # running IPS rows aggregated by context
    method: str = "auto"
    tol: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        if not isinstance(self.oracle, CountingOracle):
            self.oracle = CountingOracle(self.oracle)
        self._ips = np.zeros((self.pclass.n_contexts, self.pclass.K))

    def schedule(self, t: Optional[int] = None) -> RucbSchedule:
        return rucb_schedule(self.t + 1 if t is None else t, self.pclass.N, self.pclass.K, self.delta)


def rucb_distribution(state: RucbState, schedule: RucbSchedule) -> RucbSolution:
    warm = state.last_P.weights if state.last_P is not None else None
    s_hint = state.last_solution.s if state.last_solution is not None and state.last_solution.certificate else None
    sol = rucb_opt(state.history, state.pclass, schedule, state.oracle, method=state.method,
                   tol=state.tol, s_hint=s_hint, warm_start=warm)
    return sol


def rucb_choose(state: RucbState, x_t: int, schedule: RucbSchedule, rng: np.random.Generator) -> Tuple[int, float]:
    state.pclass.check_context(x_t)
    sol = rucb_distribution(state, schedule)
    state.last_solution = sol
    state.last_P = sol.P
    probs = smooth(induced_action_dist(sol.P, state.pclass, x_t), schedule.mu_t, state.pclass.K).probs
    a = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), probs.size - 1)
    return a, float(probs[a])


def rucb_update(state: RucbState, x_t: int, a_t: int, r_t: float, p_t: float) -> RucbState:
    rec = HistoryRecord(int(x_t), int(a_t), float(r_t), float(p_t))
    state.history.append(rec)
    state.t += 1
    state._ips[rec.x, rec.a] += rec.r / rec.p
    seen = np.flatnonzero(state._ips.any(axis=1))
    if seen.size:
        idx, score = state.oracle(AmoDataset(seen, state._ips[seen]))
    else:
        idx, score = 0, 0.0
    state.leader = (idx, score / state.t)
    return state
