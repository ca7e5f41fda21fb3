"""Central-cut ellipsoid method driven by a separation oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..errors import EmptySetCertificate, NumericalError, ParameterError

ELLIPSOID_C = 10.0


@dataclass(frozen=True)
class Hyperplane:
    """The target set lies in the half-space {z : normal . z <= offset}."""

    normal: np.ndarray
    offset: float

    def side(self, z) -> float:
        """Signed excess normal . z - offset (positive on the query side)."""
        return float(np.dot(self.normal, z) - self.offset)


class _Inside:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INSIDE"

    def __bool__(self) -> bool:
        return True


INSIDE = _Inside()

SeparationResult = Union[_Inside, Hyperplane]


@dataclass
class EllipsoidResult:
    point: Optional[np.ndarray]
    feasible: bool
    iterations: int
    budget: int
    payload: object = None  # whatever the oracle attached to the accepted point


def ellipsoid_budget(n: int, R: float, r: float, c: float = ELLIPSOID_C) -> int:
    """Iteration cap ceil(c n^2 ln(R / r))."""
    if not R > r > 0:
        raise ParameterError(f"need R > r > 0 (got R={R}, r={r})")
    return max(1, math.ceil(c * n * n * math.log(R / r)))


def separating_hyperplane_from_convex(f_value: float, subgradient, y) -> Hyperplane:
    """Cut from a violated convex constraint f <= 0 at ``y``.

    Every x with f(x) <= 0 satisfies f(y) + g.(x - y) <= 0, so the returned
    half-space {g.x <= g.y - f(y)} contains the feasible set and excludes y.
    """
    if not f_value > 0:
        raise ParameterError("the constraint must be violated at the query point (f > 0)")
    g = np.asarray(subgradient, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.any(g):
        raise EmptySetCertificate("zero subgradient at a violating point: the constraint set is empty")
    return Hyperplane(g, float(g @ y - f_value))


def ellipsoid_feasibility(separate: Callable[[np.ndarray], object], n: int, R: float, r: float,
                          center=None, c: float = ELLIPSOID_C, max_iter: Optional[int] = None,
                          on_iteration: Optional[Callable[[int], None]] = None) -> EllipsoidResult:
    """Find a point accepted by ``separate`` inside the ball B(center, R).

    ``separate(z)`` returns a :class:`Hyperplane` to cut ``z`` away, or any
    other object to accept ``z``; non-Hyperplane results are passed back as
    ``payload``.  If no point is accepted within ceil(c n^2 ln(R/r)) iterations
    the set is reported infeasible: it cannot contain a ball of radius ``r``.
    The run also stops early once the ellipsoid volume drops below that of an
    ``r``-ball, or its half-width along a cut normal drops below ``r``; either
    certifies the same thing.
    """
    if n < 1:
        raise ParameterError("dimension must be positive")
    budget = ellipsoid_budget(n, R, r, c)
    cap = budget if max_iter is None else min(budget, max_iter)
    z = np.zeros(n) if center is None else np.array(center, dtype=float)
    if z.shape != (n,):
        raise ParameterError("center has the wrong dimension")
    A = np.eye(n) * (R * R)
    log_vol = n * math.log(R)  # log of volume relative to the unit ball
    log_floor = n * math.log(r)
    if n > 1:
        shrink = n * n / (n * n - 1.0)
        log_step = 0.5 * (n * math.log(shrink) + math.log((n - 1.0) / (n + 1.0)))
    else:
        log_step = math.log(0.5)
    for it in range(cap):
        if on_iteration is not None:
            on_iteration(it)
        res = separate(z)
        if not isinstance(res, Hyperplane):
            return EllipsoidResult(z, True, it + 1, budget, res)
        if log_vol < log_floor:
            return EllipsoidResult(None, False, it + 1, budget)
        a = np.asarray(res.normal, dtype=float)
        Aa = A @ a
        q = float(a @ Aa)
        na = float(np.linalg.norm(a))
        if na > 0.0 and np.isfinite(q) and q < (r * na) ** 2:
            # too thin along a to hold an r-ball; also catches round-off collapse
            return EllipsoidResult(None, False, it + 1, budget)
        if not np.isfinite(q) or q <= 0.0:
            raise NumericalError("ellipsoid matrix lost positive definiteness",
                                 {"iteration": it, "quad_form": q, "min_diag": float(np.min(np.diag(A)))})
        g = Aa / math.sqrt(q)
        if n == 1:
            z = z - g / 2.0
            A = A / 4.0
        else:
            z = z - g / (n + 1.0)
            A = shrink * (A - (2.0 / (n + 1.0)) * np.outer(g, g))
            A = 0.5 * (A + A.T)
        log_vol += log_step
        if not np.all(np.isfinite(z)):
            raise NumericalError("ellipsoid center diverged", {"iteration": it})
    return EllipsoidResult(None, False, cap, budget)
