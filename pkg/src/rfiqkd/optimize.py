"""Constrained nonlinear minimisation by exterior quadratic penalty.

The solver minimises a smooth objective over box-bounded parameters subject
to two-sided interval constraints lo_i <= g_i(x) <= hi_i (equalities are
zero-width intervals). Each start runs a sequence of smooth subproblems

    objective(x) + w * sum_i violation_i(x)^2

with geometrically increasing weight w, each solved by L-BFGS-B with
central-difference gradients. Results from all starts, and the start points
themselves, compete on (feasibility, objective value) with a lexicographic
tie-break on the parameter vector, so the reduction over starts is
deterministic and associative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

__all__ = [
    "ConstrainedProblem",
    "MinimizeConfig",
    "MinimizationResult",
    "minimize",
    "multistart_points",
]


@dataclass
class ConstrainedProblem:
    """Objective, interval constraints, bounds and starting points.

    constraints(x) must return a vector aligned with lower/upper; use -inf
    and +inf to deactivate one side. penalty, when given, must equal
    objective(x) + w * sum(violations^2) for the same constraint vector and
    exists purely as a fused fast path for hot models.
    """

    objective: Callable[[np.ndarray], float]
    constraints: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    bounds: Sequence[tuple[float | None, float | None]]
    starts: list[np.ndarray]
    penalty: Callable[[np.ndarray, float], float] | None = None

    def __post_init__(self) -> None:
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper must have equal shapes")
        if (self.lower > self.upper).any():
            raise ValueError("constraint intervals must satisfy lo <= hi")
        if not self.starts:
            raise ValueError("at least one starting point is required")

    def max_violation(self, x: np.ndarray) -> float:
        g = np.asarray(self.constraints(x), dtype=float)
        below = np.clip(self.lower - g, 0.0, None)
        above = np.clip(g - self.upper, 0.0, None)
        return float(max(below.max(initial=0.0), above.max(initial=0.0)))

    def default_penalty(self, x: np.ndarray, weight: float) -> float:
        g = np.asarray(self.constraints(x), dtype=float)
        below = np.clip(self.lower - g, 0.0, None)
        above = np.clip(g - self.upper, 0.0, None)
        return float(self.objective(x) + weight * ((below**2).sum() + (above**2).sum()))


@dataclass(frozen=True)
class MinimizeConfig:
    """Penalty schedule, inner-solver settings and feasibility tolerance."""

    feas_tol: float = 1e-6
    penalty_start: float = 10.0
    penalty_growth: float = 10.0
    max_stages: int = 8
    inner_maxiter: int = 400
    fd_rel_step: float = 1e-6
    ftol: float = 1e-12
    gtol: float = 1e-9


@dataclass
class MinimizationResult:
    value: float
    x: np.ndarray
    max_violation: float
    iterations: int
    converged: bool
    status: str = ""

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "x": np.asarray(self.x).tolist(),
            "max_violation": self.max_violation,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
        }


def _clip_to_bounds(x: np.ndarray, bounds) -> np.ndarray:
    out = np.array(x, dtype=float)
    for i, (lo, hi) in enumerate(bounds):
        if lo is not None:
            out[i] = max(out[i], lo)
        if hi is not None:
            out[i] = min(out[i], hi)
    return out


def _candidate_key(value: float, x: np.ndarray) -> tuple:
    return (value, tuple(np.asarray(x, dtype=float)))


def minimize(problem: ConstrainedProblem, config: MinimizeConfig = MinimizeConfig()) -> MinimizationResult:
    """Best feasible point across all starts.

    Feasibility is re-checked through problem.constraints, independently of
    the penalty machinery. If no start reaches the feasibility tolerance the
    least-violating point is returned with converged=False.
    """
    penalty = problem.penalty if problem.penalty is not None else problem.default_penalty
    total_iters = 0

    feasible: list[tuple[tuple, float, np.ndarray]] = []
    infeasible: list[tuple[float, tuple, np.ndarray]] = []

    def consider(x: np.ndarray) -> None:
        viol = problem.max_violation(x)
        if viol <= config.feas_tol:
            value = float(problem.objective(x))
            feasible.append((_candidate_key(value, x), value, x))
        else:
            infeasible.append((viol, _candidate_key(0.0, x), x))

    for start in problem.starts:
        x = _clip_to_bounds(start, problem.bounds)
        consider(x)
        weight = config.penalty_start
        for _ in range(config.max_stages):
            res = scipy.optimize.minimize(
                penalty,
                x,
                args=(weight,),
                method="L-BFGS-B",
                jac="3-point",
                bounds=problem.bounds,
                options={
                    "maxiter": config.inner_maxiter,
                    "ftol": config.ftol,
                    "gtol": config.gtol,
                    "finite_diff_rel_step": config.fd_rel_step,
                },
            )
            x = res.x
            total_iters += int(res.nit)
            consider(x)
            if problem.max_violation(x) <= config.feas_tol:
                break
            weight *= config.penalty_growth

    if feasible:
        key, value, x = min(feasible, key=lambda t: t[0])
        return MinimizationResult(
            value=value,
            x=np.asarray(x, dtype=float),
            max_violation=problem.max_violation(x),
            iterations=total_iters,
            converged=True,
            status="converged",
        )
    viol, _, x = min(infeasible, key=lambda t: (t[0], t[1]))
    return MinimizationResult(
        value=float(problem.objective(x)),
        x=np.asarray(x, dtype=float),
        max_violation=viol,
        iterations=total_iters,
        converged=False,
        status="infeasible",
    )


def multistart_points(
    bounds: np.ndarray, n: int, seed: int, anchors: Sequence[np.ndarray] = ()
) -> list[np.ndarray]:
    """Anchor points first (clipped into the box), then uniform draws.

    bounds is an (n_dim, 2) array of finite sampling limits; it may be
    narrower than the optimiser's own bounds.
    """
    if n < 1:
        raise ValueError("need at least one start")
    bounds = np.asarray(bounds, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    points = [np.clip(np.asarray(a, dtype=float), lo, hi) for a in anchors][:n]
    rng = np.random.default_rng(seed)
    while len(points) < n:
        points.append(lo + (hi - lo) * rng.random(len(lo)))
    return points
