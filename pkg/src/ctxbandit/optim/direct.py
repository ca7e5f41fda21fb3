"""Explicit solver for small policy classes.

Works directly with the weight vector P over the class: the objective
sum_i P_i Delta(pi_i) is linear and each constraint Z is convex in P.
Constraints are generated lazily from the exact maximal violator over the
hull and the convex subproblem is handed to SLSQP.  The result uses the same
Certificate type as the oracle-based solver.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from ..core import PolicyDistribution
from ..elimination import find_low_variance_dist
from .program import Certificate, ProgramA, max_hull_violation

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7
MAX_CUT_ROUNDS = 20


def _empirical_context_probs(prog: ProgramA) -> np.ndarray:
    D = np.zeros(prog.emb.pclass.n_contexts)
    D[prog.emb.contexts] = prog.q.reshape(prog.emb.m, prog.K)[:, 0]
    return D


def solve_direct(prog: ProgramA, warm_start: Optional[np.ndarray] = None) -> Certificate:
    pclass = prog.emb.pclass
    V = prog.emb.vertices()
    deltas = prog.v - V @ prog.w
    scale = 1.0 - prog.K * prog.mu

    # Always feasible fallback: low-variance distribution on the empirical contexts
    # keeps every u . Z below K / (1 - K mu) <= 2K < 4K.
    P_safe = find_low_variance_dist(range(pclass.N), pclass, _empirical_context_probs(prog), prog.mu).weights

    cuts = [V[i] for i in range(V.shape[0])]

    def cons_fun(P):
        Wp = scale * (P @ V) + prog.mu
        Zs = np.array(cuts)
        lhs = (Zs * (prog.q / Wp)).sum(axis=1)
        rhs = np.array([prog.rhs(z) for z in Zs])
        return rhs - lhs

    def cons_jac(P):
        Wp = scale * (P @ V) + prog.mu
        Zs = np.array(cuts)
        coef = Zs * (prog.q * scale / (Wp * Wp))  # (m, dim)
        return coef @ V.T

    x0 = P_safe
    if warm_start is not None and np.asarray(warm_start).size == pclass.N:
        x0 = np.asarray(warm_start, dtype=float)

    best = P_safe
    for _ in range(MAX_CUT_ROUNDS):
        res = minimize(lambda P: float(deltas @ P), x0, jac=lambda P: deltas, method="SLSQP",
                       bounds=[(0.0, 1.0)] * pclass.N,
                       constraints=[{"type": "eq", "fun": lambda P: P.sum() - 1.0, "jac": lambda P: np.ones_like(P)},
                                    {"type": "ineq", "fun": cons_fun, "jac": cons_jac}],
                       options={"maxiter": 200, "ftol": 1e-10})
        P = np.clip(res.x, 0.0, None)
        if P.sum() <= 0:
            break
        P = P / P.sum()
        W = P @ V
        viol, Z = max_hull_violation(prog, W)
        if viol <= FEAS_TOL:
            if deltas @ P <= deltas @ best or max_hull_violation(prog, best @ V)[0] > FEAS_TOL:
                best = P
            break
        cuts.append(Z)
        x0 = P
    else:
        log.debug("direct solver ran out of cut rounds; using the safe distribution")

    P = PolicyDistribution(best)
    W = best @ V
    viol = max_hull_violation(prog, W)[0]
    reg = prog.regret(W)
    return Certificate(P=P, s=reg, point=W, regret=reg, max_violation=viol, eps=prog.eps,
                       gamma=prog.gamma, delta_relax=prog.delta_relax, method="direct")
