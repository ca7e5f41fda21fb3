"""Round-indexed constants for both learners and a few deviation helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ApplicabilityError, ParameterError

EPS_OPT_CONST = 110.0
BETA_CONST = 180.0


def _check_common(t: int, N: int, K: int, delta: float, min_K: int = 2) -> None:
    if int(t) != t or t < 1:
        raise ParameterError(f"round t must be a positive integer (got {t!r})")
    if t > 2**31:
        raise ParameterError("round index too large for exact t*t arithmetic")
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer (got {N!r})")
    if int(K) != K or K < min_K:
        raise ParameterError(f"K must be an integer >= {min_K} (got {K!r})")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1) (got {delta!r})")


@dataclass(frozen=True)
class PeSchedule:
    t: int
    delta_t: float
    b_t: float
    mu_t: float


@dataclass(frozen=True)
class RucbSchedule:
    t: int
    C_t: float
    mu_t: float
    beta_t: Optional[float]  # undefined at t = 1
    eps_opt_t: Optional[float]


def pe_schedule(t: int, N: int, K: int, delta: float) -> PeSchedule:
    _check_common(t, N, K, delta)
    t = int(t)
    delta_t = delta / (4.0 * N * t * t)
    log_term = math.log(1.0 / delta_t)
    b_t = 2.0 * math.sqrt(2.0 * K * log_term / t)
    mu_t = min(1.0 / (2 * K), math.sqrt(log_term / (2.0 * K * t)))
    return PeSchedule(t=t, delta_t=delta_t, b_t=b_t, mu_t=mu_t)


def rucb_C(t: int, N: int, delta: float) -> float:
    """C_t = 2 ln(N t / delta), natural log."""
    return 2.0 * math.log(N * t / delta)


def rucb_schedule(t: int, N: int, K: int, delta: float) -> RucbSchedule:
    _check_common(t, N, K, delta)
    t = int(t)
    C_t = rucb_C(t, N, delta)
    mu_t = min(1.0 / (2 * K), math.sqrt(C_t / (2.0 * K * t)))
    if t >= 2:
        C_prev = rucb_C(t - 1, N, delta)
        beta_t = (t - 1) / (BETA_CONST * C_prev)
        eps_opt = EPS_OPT_CONST * math.sqrt(K * C_prev / (t - 1))
    else:
        beta_t = eps_opt = None
    return RucbSchedule(t=t, C_t=C_t, mu_t=mu_t, beta_t=beta_t, eps_opt_t=eps_opt)


def freedman_bound(V: float, R: float, delta: float) -> float:
    """Deviation radius 2 sqrt(V ln(2/delta)) for a martingale with variance sum V and increments <= R.

    Raises ApplicabilityError when R exceeds sqrt(V / ln(2/delta)), the range in
    which the inequality is valid.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1) (got {delta!r})")
    if V < 0:
        raise ParameterError("variance sum must be non-negative")
    L = math.log(2.0 / delta)
    if R > math.sqrt(V / L):
        raise ApplicabilityError(f"increment bound R={R} exceeds sqrt(V/ln(2/delta))={math.sqrt(V / L):.6g}")
    return 2.0 * math.sqrt(V * L)


def freedman_max_increment(V: float, delta: float) -> float:
    return math.sqrt(V / math.log(2.0 / delta))


def bernstein_radius(variance: float, value_range: float, n: int, delta: float) -> float:
    """Two-sided Bernstein deviation for the mean of ``n`` i.i.d. terms.

    ``value_range`` bounds |X - E X|; the radius is
    sqrt(2 var L / n) + 2 range L / (3 n) with L = ln(2/delta).
    """
    if n < 1 or not 0.0 < delta < 1.0:
        raise ParameterError("need n >= 1 and delta in (0, 1)")
    L = math.log(2.0 / delta)
    return math.sqrt(2.0 * variance * L / n) + 2.0 * value_range * L / (3.0 * n)


# ----------------------------------------------------------------- variance proxies


def inverse_propensity_profile(W_pi: np.ndarray, mu: float, K: int) -> np.ndarray:
    """Per-context 1/W'(x, pi(x)) given W_P(x, pi(x)) for every context."""
    return 1.0 / ((1.0 - K * mu) * np.asarray(W_pi, dtype=float) + mu)


def variance_proxy(W_pi: np.ndarray, context_probs: np.ndarray, mu: float, K: int) -> float:
    """E_{x ~ D_X}[1 / W'(x, pi(x))] computed exactly."""
    return float(np.dot(context_probs, inverse_propensity_profile(W_pi, mu, K)))


def empirical_variance_proxy(W_pi: np.ndarray, contexts: np.ndarray, mu: float, K: int) -> float:
    """Sample average of 1 / W'(x_i, pi(x_i)) over the observed contexts."""
    contexts = np.asarray(contexts, dtype=np.int64)
    if contexts.size == 0:
        return 0.0
    return float(inverse_propensity_profile(W_pi, mu, K)[contexts].mean())
