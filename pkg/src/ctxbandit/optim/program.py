"""The per-round convex program of the randomized-UCB learner and its oracle-based solver.

For a history of ``t - 1`` records the program looks for a randomized policy
W in the policy hull C with small empirical regret Delta(W) <= s such that for
every Z in C

    E_{x ~ h}[ sum_a Z(x, a) / W'(x, a) ]  <=  max{4K, beta Delta(Z)^2}.

Both sides are written on the hull embedding: the left side is u_W . Z and
Delta(Z) = v - w . Z, where w holds the IPS weights and v = max_pi w . pi.
The solver runs an outer ellipsoid over W, a perceptron-style hull membership
test, and an inner ellipsoid that searches for violated Z, all driven only by
argmax-oracle calls.  A bisection over s then minimizes the regret budget.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..amo import CountingOracle
from ..concentration import RucbSchedule
from ..core import HistoryRecord, PolicyClass, PolicyDistribution
from ..errors import (EmptySetCertificate, InternalInconsistencyError, ParameterError)
from .ellipsoid import (ELLIPSOID_C, Hyperplane, ellipsoid_budget, ellipsoid_feasibility,
                        separating_hyperplane_from_convex)
from .hull import HullEmbedding, InHull, hull_iteration_cap, hull_membership, linopt_over_hull

DIRECT_MAX_N = 64


def default_delta_relax(mu: float, K: int) -> float:
    """Largest radius with delta <= mu/4 and 5 eps = 40 delta / mu^2 <= K."""
    return min(mu / 4.0, mu * mu * K / 40.0)


@dataclass
class ProgramA:
    emb: HullEmbedding
    q: np.ndarray  # empirical context frequencies n_x / (t - 1), repeated over actions
    t: int
    w: np.ndarray
    v: float
    K: int
    mu: float
    beta: float
    delta_relax: float

    @property
    def eps(self) -> float:
        return 8.0 * self.delta_relax / self.mu ** 2

    @property
    def gamma(self) -> float:
        return self.delta_relax / self.mu

    @classmethod
    def build(cls, history: Sequence[HistoryRecord], pclass: PolicyClass, mu: float, beta: float,
              oracle, delta_relax: Optional[float] = None) -> "ProgramA":
        if not history:
            raise ParameterError("the program needs a non-empty history")
        K = pclass.K
        if not 0 < mu <= 1.0 / (2 * K):
            raise ParameterError("mu must lie in (0, 1/(2K)]")
        if beta is None or beta <= 0:
            raise ParameterError("beta must be positive")
        dr = default_delta_relax(mu, K) if delta_relax is None else float(delta_relax)
        if not 0 < dr <= mu / 4.0:
            raise ParameterError("relaxation radius must lie in (0, mu/4]")
        n = len(history)
        emb = HullEmbedding(pclass, [h.x for h in history])
        row = {int(x): i for i, x in enumerate(emb.contexts)}
        counts = np.zeros(emb.m)
        w = np.zeros((emb.m, K))
        for h in history:
            i = row[h.x]
            counts[i] += 1
            w[i, h.a] += h.r / h.p
        w = (w / n).ravel()
        _, v = oracle(emb.dataset(w))
        q = np.repeat(counts / n, K)
        return cls(emb, q, n + 1, w, float(v), K, float(mu), float(beta), dr)

    # -- constraint pieces -------------------------------------------------
    def regret(self, Z) -> float:
        return float(self.v - self.w @ Z)

    def smoothed(self, W) -> np.ndarray:
        return (1.0 - self.K * self.mu) * np.asarray(W, dtype=float) + self.mu

    def u_of(self, W) -> np.ndarray:
        return self.q / self.smoothed(W)

    def rhs(self, Z) -> float:
        d = self.regret(Z)
        return max(4.0 * self.K, self.beta * d * d)

    def violation(self, W, Z) -> float:
        """u_W . Z - max{4K, beta Delta(Z)^2}; positive means Z violates W's constraint."""
        return float(self.u_of(W) @ Z) - self.rhs(Z)


@dataclass
class Certificate:
    """Outcome of one feasibility solve at budget ``s``."""

    P: PolicyDistribution
    s: float
    point: np.ndarray
    regret: float  # Delta(W_P)
    max_violation: Optional[float]  # exact max over C of the constraint excess at W_P, when computed
    eps: float
    gamma: float
    delta_relax: float
    iterations: int = 0
    amo_calls: int = 0
    method: str = "ellipsoid"

    @property
    def slack_bound(self) -> float:
        return 5.0 * self.eps

    @property
    def regret_bound(self) -> float:
        return self.s + 2.0 * self.gamma


class Infeasible:
    def __init__(self, s: float, iterations: int = 0, amo_calls: int = 0):
        self.s = s
        self.iterations = iterations
        self.amo_calls = amo_calls

    def __repr__(self) -> str:
        return f"Infeasible(s={self.s:.6g}, iterations={self.iterations})"

    def __bool__(self) -> bool:
        return False


@dataclass
class TraceRow:
    iteration: int
    phase: str
    amo_calls: int


def write_trace_csv(rows: Sequence[TraceRow], path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["iteration", "phase", "amo_calls"])
        for r in rows:
            wr.writerow([r.iteration, r.phase, r.amo_calls])


# --------------------------------------------------------- exact check (small N)


def max_hull_violation(prog: ProgramA, W) -> Tuple[float, np.ndarray]:
    """Exact max over Z in C of u_W . Z - max{4K, beta Delta(Z)^2}, with a maximizer.

    The excess depends on Z only through (u . Z, w . Z) and increases with the
    first coordinate, so the maximum sits on an edge of the planar shadow of
    the hull.  Every vertex pair is scanned; O(N^2), meant for small classes.
    """
    V = prog.emb.vertices()
    u = prog.u_of(W)
    a = V @ u
    b = V @ prog.w
    N = a.size
    i, j = np.triu_indices(N, k=0)
    da, db = a[j] - a[i], b[j] - b[i]
    cands = [np.zeros_like(da), np.ones_like(da)]
    with np.errstate(divide="ignore", invalid="ignore"):
        knot = math.sqrt(4.0 * prog.K / prog.beta)
        for target in (prog.v - knot, prog.v + knot):
            cands.append((target - b[i]) / db)
        cands.append((prog.v + da / (2.0 * prog.beta * db) - b[i]) / db)
    best, best_z = -math.inf, None
    for lam in cands:
        lam = np.clip(np.nan_to_num(lam, nan=0.0, posinf=0.0, neginf=0.0), 0.0, 1.0)
        aa = a[i] + lam * da
        dd = prog.v - (b[i] + lam * db)
        g = aa - np.maximum(4.0 * prog.K, prog.beta * dd * dd)
        k = int(np.argmax(g))
        if g[k] > best:
            best = float(g[k])
            best_z = (1 - lam[k]) * V[i[k]] + lam[k] * V[j[k]]
    return best, best_z


# ------------------------------------------------------------- violation search


@dataclass
class Violation:
    Z: np.ndarray
    excess: float


class _NoViolation:
    def __repr__(self) -> str:
        return "NO_VIOLATION"

    def __bool__(self) -> bool:
        return False


NO_VIOLATION = _NoViolation()


def inner_radius(prog: ProgramA, u: np.ndarray) -> float:
    """Radius of a ball around any violating Z that keeps the relaxed inner program feasible."""
    dr, eps = prog.delta_relax, prog.eps
    nu = float(np.linalg.norm(u))
    nw = float(np.linalg.norm(prog.w))
    rz = math.sqrt(prog.emb.m) + 2 * dr
    r = dr
    if nu > 0:
        r = min(r, eps / (2 * nu))
    if nw > 0:
        r = min(r, eps / (2 * prog.beta * nw * (2 * nw * rz + 2 * abs(prog.v))))
    return r


def violation_search(prog: ProgramA, W, oracle, counters: Optional[dict] = None) -> Union[Violation, _NoViolation]:
    """Find Z in C_{2 delta} violating W's constraint by at least 2 eps, or certify none exceeds 3 eps in C."""
    K, eps, dr = prog.K, prog.eps, prog.delta_relax
    u = prog.u_of(W)
    # Screens that settle most queries with one oracle call.
    _, z, score = linopt_over_hull(u, prog.emb, oracle)
    if score <= 4.0 * K + 3.0 * eps:
        return NO_VIOLATION
    exc = float(u @ z) - prog.rhs(z)
    if exc >= 2.0 * eps:
        return Violation(z, exc)

    def f(Z):
        return prog.rhs(Z) + 3.0 * eps - float(u @ Z)

    def separate(Z):
        hm = hull_membership(Z, dr, prog.emb, oracle)
        if isinstance(hm, Hyperplane):
            return hm
        fz = f(Z)
        if fz > eps:
            d = prog.regret(Z)
            g = -u.copy()
            if prog.beta * d * d > 4.0 * K:
                g -= 2.0 * prog.beta * d * prog.w
            return separating_hyperplane_from_convex(fz - eps, g, Z)
        return Z

    R = prog.emb.radius() + 2 * dr
    r = inner_radius(prog, u)
    try:
        res = ellipsoid_feasibility(separate, prog.emb.dim, R, r, center=prog.emb.center())
    except EmptySetCertificate:
        return NO_VIOLATION
    if counters is not None:
        counters["inner_iterations"] = counters.get("inner_iterations", 0) + res.iterations
    if res.feasible:
        Z = res.payload
        return Violation(Z, float(u @ Z) - prog.rhs(Z))
    return NO_VIOLATION


def variance_cut(prog: ProgramA, W, Z) -> Hyperplane:
    """Hyperplane separating W from every point satisfying the relaxed constraint for Z."""
    Wp = prog.smoothed(W)
    fz = float(prog.q @ (Z / Wp)) - prog.rhs(Z) - 2.0 * prog.eps
    grad = -prog.q * Z * (1.0 - prog.K * prog.mu) / (Wp * Wp)
    # feasible points have f_Z <= -eps, so shifting by eps/2 keeps them inside
    return separating_hyperplane_from_convex(max(fz, 0.0) + prog.eps / 2.0, grad, W)


# ------------------------------------------------------------------ outer solve


def amo_call_budget(prog: ProgramA, c: float = ELLIPSOID_C) -> int:
    """Product of the outer ellipsoid, perceptron and inner ellipsoid budgets."""
    dr = prog.delta_relax
    n = prog.emb.dim
    outer = ellipsoid_budget(n, prog.emb.radius() + dr, dr / 2.0, c)
    perceptron = hull_iteration_cap(prog.emb.m, dr)
    tk = prog.t * prog.K
    inner = math.ceil(c * tk * tk * math.log(max(tk / dr, math.e)))
    return outer * perceptron * inner


def _count(oracle) -> int:
    return oracle.count if isinstance(oracle, CountingOracle) else 0


def solve_program_A(prog: ProgramA, s: float, oracle, trace: Optional[List[TraceRow]] = None,
                    exact_check: bool = True) -> Union[Certificate, Infeasible]:
    """Feasibility solve at regret budget ``s`` by the outer ellipsoid.

    On success the certificate's distribution satisfies Delta(W_P) <= s + 2 gamma
    and every Z in C meets its constraint within 5 eps.
    """
    oracle = oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)
    start = oracle.count
    dr = prog.delta_relax
    state = {"phase": "linear"}

    def separate(W):
        state["phase"] = "linear"
        if prog.regret(W) > s:
            return Hyperplane(-prog.w, s - prog.v)
        state["phase"] = "hull"
        hm = hull_membership(W, dr, prog.emb, oracle)
        if isinstance(hm, Hyperplane):
            return hm
        state["phase"] = "violation"
        viol = violation_search(prog, W, oracle)
        if isinstance(viol, Violation):
            return variance_cut(prog, W, viol.Z)
        return hm

    def log_iter(it):
        if trace is not None and it > 0:
            trace.append(TraceRow(it - 1, state["phase"], oracle.count - start))

    res = ellipsoid_feasibility(separate, prog.emb.dim, prog.emb.radius() + dr, dr / 2.0,
                                center=prog.emb.center(), on_iteration=log_iter)
    calls = oracle.count - start
    if trace is not None:
        trace.append(TraceRow(res.iterations - 1, state["phase"], calls))
    if not res.feasible:
        return Infeasible(s, res.iterations, calls)
    hm: InHull = res.payload
    WP = hm.point
    maxv = max_hull_violation(prog, WP)[0] if exact_check and prog.emb.pclass.N <= 256 else None
    return Certificate(P=hm.P, s=s, point=WP, regret=prog.regret(WP), max_violation=maxv,
                       eps=prog.eps, gamma=prog.gamma, delta_relax=dr,
                       iterations=res.iterations, amo_calls=calls)


# ---------------------------------------------------------------------- rucb_opt


@dataclass
class RucbSolution:
    P: PolicyDistribution
    s: float
    certificate: Optional[Certificate]
    probes: List[Tuple[float, bool]] = field(default_factory=list)
    s_hi: float = 0.0


def regret_cap(prog: ProgramA, oracle) -> float:
    """Largest empirical regret any point of C can have (one oracle call)."""
    _, worst = oracle(prog.emb.dataset(-prog.w))
    return prog.v + worst


def rucb_opt(history: Sequence[HistoryRecord], pclass: PolicyClass, schedule: RucbSchedule, oracle,
             method: str = "auto", tol: Optional[float] = None, s_hint: Optional[float] = None,
             mu: Optional[float] = None, beta: Optional[float] = None, delta_relax: Optional[float] = None,
             trace: Optional[List[TraceRow]] = None, warm_start=None) -> RucbSolution:
    """Approximate minimizer of E_P[Delta] subject to the variance constraints.

    ``method`` is "ellipsoid" (oracle-only bisection over s), "direct" (explicit
    convex solve over the class, small N only) or "auto" (direct when N <= 64).
    ``mu`` and ``beta`` default to the schedule's values.
    """
    N = pclass.N
    t = len(history) + 1
    if schedule.t != t:
        raise ParameterError(f"schedule is for round {schedule.t} but the history implies round {t}")
    if t == 1:
        return RucbSolution(PolicyDistribution.uniform(N), 0.0, None)
    if N == 1:
        return RucbSolution(PolicyDistribution.point_mass(0, N), 0.0, None)
    mu = schedule.mu_t if mu is None else mu
    beta = schedule.beta_t if beta is None else beta
    oracle = oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)
    prog = ProgramA.build(history, pclass, mu, beta, oracle, delta_relax)
    if method == "auto":
        method = "direct" if N <= DIRECT_MAX_N else "ellipsoid"
    if method == "direct":
        from .direct import solve_direct

        cert = solve_direct(prog, warm_start=warm_start)
        return RucbSolution(cert.P, cert.s, cert)
    if method != "ellipsoid":
        raise ParameterError(f"unknown method {method!r}")

    s_hi = min(8.0 * math.sqrt(prog.K / prog.beta), regret_cap(prog, oracle) + prog.gamma)
    tol = schedule.eps_opt_t / 2.0 if tol is None else tol
    probes: List[Tuple[float, bool]] = []

    def probe(s):
        res = solve_program_A(prog, s, oracle, trace=trace)
        probes.append((s, bool(res)))
        return res

    best = probe(s_hi)
    if not best:
        raise InternalInconsistencyError(f"program reported infeasible at the guaranteed-feasible budget {s_hi:.6g}")
    lo, hi = 0.0, s_hi
    if s_hint is not None and lo < s_hint < hi and hi - lo > tol:
        res = probe(s_hint)
        if res:
            best, hi = res, s_hint
        else:
            lo = s_hint
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = probe(mid)
        if res:
            best, hi = res, mid
        else:
            lo = mid
    return RucbSolution(best.P, best.s, best, probes, s_hi)
