"""Secret key fractions: analytic BB84, analytic rotation-invariant, and the
uncalibrated-device rate obtained by constrained minimisation.

All rates are in secure bits per sifted key bit and clamped to [0, 1];
negative values mean the protocol aborts, which is reported through the
result status rather than a negative number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernel
from .core import binary_entropy
from .estimation import ConstraintSet
from .optimize import ConstrainedProblem, MinimizeConfig, minimize, multistart_points

__all__ = [
    "RFI_MAX_QBER",
    "KeyrateResult",
    "AnalysisConfig",
    "bb84_rate",
    "bb84_rate_any_pair",
    "bb84_problem",
    "rfi_rate",
    "quantity_c",
    "urfi_rate",
    "urfi_problem",
]

# validity limit of the analytic rotation-invariant rate formula
RFI_MAX_QBER = 0.159

_PAIR_INDEX = {"XX": (0, 0), "XY": (0, 1), "YX": (1, 0), "YY": (1, 1)}


def _xlog2x(x: float) -> float:
    if x <= 0.0:
        return 0.0
    return x * math.log2(x)


@dataclass(frozen=True)
class KeyrateResult:
    """Secret key fraction with diagnostics.

    rate = max(0, s_min - h(qber_bound)) always holds; status is one of
    "ok", "clamped" (the difference was negative), "infeasible" (no model
    parameters satisfy the constraints) or "out_of_domain"/"unphysical" for
    the analytic rotation-invariant formula.
    """

    rate: float
    s_min: float
    qber_bound: float
    status: str
    sigma: float | None = None
    minimizer: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "rate": self.rate,
            "s_min": self.s_min,
            "qber_bound": self.qber_bound,
            "status": self.status,
            "sigma": self.sigma,
            "minimizer": None if self.minimizer is None else np.asarray(self.minimizer).tolist(),
        }


@dataclass(frozen=True)
class AnalysisConfig:
    """Settings of the uncalibrated-device minimisation.

    sigma multiplies every constraint standard deviation and the key-basis
    correlator deviation inside the error-rate bound. The three use_* flags
    select constraint families; ec_efficiency scales the error-correction
    term h(Q) (1 is the Shannon limit).
    """

    sigma: float = 3.0
    n_starts: int = 16
    seed: int = 0
    feas_tol: float = 1e-6
    penalty_start: float = 10.0
    penalty_growth: float = 10.0
    max_stages: int = 8
    inner_maxiter: int = 400
    ec_efficiency: float = 1.0
    use_correlators: bool = True
    use_prep_probs: bool = True
    use_det_probs: bool = True
    extra_anchors: Sequence[np.ndarray] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.ec_efficiency < 1.0:
            raise ValueError("error-correction efficiency cannot beat the Shannon limit")


# ---------------------------------------------------------------------------
# analytic rates
# ---------------------------------------------------------------------------


def bb84_rate(c_xx: float, c_zz: float) -> float:
    """Closed-form two-correlator rate, clamped to [0, 1].

    r = 1 + sum over the four sign products z*x of (z*x) log2 (z*x) with
    x+- = (1 +- c_xx)/2 and z+- = (1 +- c_zz)/2, which equals
    1 - h(x+) - h(z+).
    """
    if abs(c_xx) > 1.0 or abs(c_zz) > 1.0:
        raise ValueError("correlators must lie in [-1, 1]")
    xp, xm = (1.0 + c_xx) / 2.0, (1.0 - c_xx) / 2.0
    zp, zm = (1.0 + c_zz) / 2.0, (1.0 - c_zz) / 2.0
    r = 1.0 + _xlog2x(zp * xp) + _xlog2x(zp * xm) + _xlog2x(zm * xp) + _xlog2x(zm * xm)
    return min(max(r, 0.0), 1.0)


def bb84_rate_any_pair(corr: np.ndarray, pair: str) -> float:
    """Two-correlator rate using one equatorial correlator pair.

    pair selects among XX, XY, YX, YY; its absolute value enters the rate
    since a deterministic sign flip is classically correctable.
    """
    corr = np.asarray(corr, dtype=float)
    if pair not in _PAIR_INDEX:
        raise ValueError(f"pair must be one of {sorted(_PAIR_INDEX)}")
    a, b = _PAIR_INDEX[pair]
    return bb84_rate(abs(float(corr[a, b])), float(corr[2, 2]))


def bb84_problem(c_xx: float, c_zz: float, n_starts: int = 4, seed: int = 0) -> ConstrainedProblem:
    """The four-eigenvalue constrained problem whose solution is bb84_rate.

    Minimise 1 + sum e_i log2 e_i over the probability simplex subject to
    the two correlator equalities; used as an independent cross-check of the
    closed form.
    """

    def objective(e: np.ndarray) -> float:
        return 1.0 + sum(_xlog2x(float(v)) for v in e)

    def constraint_values(e: np.ndarray) -> np.ndarray:
        return np.array(
            [
                e[0] + e[1] + e[2] + e[3],
                1.0 - 2.0 * e[1] - 2.0 * e[3],
                1.0 - 2.0 * e[2] - 2.0 * e[3],
            ]
        )

    targets = np.array([1.0, c_xx, c_zz])
    box = np.array([[0.0, 1.0]] * 4)
    starts = multistart_points(box, n_starts, seed, anchors=[np.full(4, 0.25)])
    return ConstrainedProblem(
        objective=objective,
        constraints=constraint_values,
        lower=targets,
        upper=targets,
        bounds=[(0.0, 1.0)] * 4,
        starts=starts,
    )


def quantity_c(corr: np.ndarray) -> float:
    """Rotation-invariant eavesdropping monitor: sum of the four squared
    equatorial correlators. At most 2 for physical channels."""
    corr = np.asarray(corr, dtype=float)
    return float(corr[0, 0] ** 2 + corr[0, 1] ** 2 + corr[1, 0] ** 2 + corr[1, 1] ** 2)


def rfi_rate(q: float, c: float) -> KeyrateResult:
    """Analytic rotation-invariant rate from the error rate q and monitor c.

    Valid for q <= RFI_MAX_QBER; beyond that the formula does not apply and
    the result is zero with status "out_of_domain". (q, c) combinations no
    qubit channel can produce give status "unphysical".
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("error rate must lie in [0, 1]")
    if c < 0.0 or c > 2.0 + 1e-9:
        raise ValueError("the invariant c must lie in [0, 2]")
    c = min(c, 2.0)
    if q > RFI_MAX_QBER:
        return KeyrateResult(rate=0.0, s_min=0.0, qber_bound=q, status="out_of_domain")

    u = min(math.sqrt(c / 2.0) / (1.0 - q), 1.0)
    if q == 0.0:
        v_term = 0.0  # continuous limit of q * h((1+v)/2)
    else:
        inner = max(c / 2.0 - (1.0 - q) ** 2 * u**2, 0.0)
        v = math.sqrt(inner) / q
        if v > 1.0 + 1e-9:
            return KeyrateResult(rate=0.0, s_min=0.0, qber_bound=q, status="unphysical")
        v_term = q * binary_entropy((1.0 + min(v, 1.0)) / 2.0)
    eve_info = (1.0 - q) * binary_entropy((1.0 + u) / 2.0) + v_term
    s = 1.0 - eve_info
    raw = s - binary_entropy(q)
    return KeyrateResult(
        rate=max(raw, 0.0),
        s_min=s,
        qber_bound=q,
        status="ok" if raw >= 0.0 else "clamped",
    )


# ---------------------------------------------------------------------------
# uncalibrated-device rate
# ---------------------------------------------------------------------------

# parameter-vector bounds: channel parameters, direction angles with room to
# wrap, efficiencies with one per side pinned to remove the scale gauge
_ANGLE_BOUNDS = [(-math.pi, 2 * math.pi), (-2 * math.pi, 2 * math.pi)]
_EFF_BOUNDS = (0.1, 10.0)


def _optimizer_bounds() -> list[tuple[float, float]]:
    bounds: list[tuple[float, float]] = [(-1.0, 1.0), (-1.0, 1.0)]
    bounds += _ANGLE_BOUNDS * 10
    eff = [_EFF_BOUNDS] * 12
    eff[0] = (1.0, 1.0)  # preparation-side scale gauge
    eff[6] = (1.0, 1.0)  # detection-side scale gauge
    bounds += eff
    return bounds


def _sampling_box() -> np.ndarray:
    box = [(-1.0, 1.0), (-1.0, 1.0)]
    box += [(0.0, math.pi), (-2 * math.pi, 2 * math.pi)] * 10
    box += [(1.0, 1.0), *[(0.5, 2.0)] * 5, (1.0, 1.0), *[(0.5, 2.0)] * 5]
    return np.asarray(box, dtype=float)


_IDEAL_ANGLES = {
    "X+": (math.pi / 2, 0.0),
    "X-": (math.pi / 2, math.pi),
    "Y+": (math.pi / 2, math.pi / 2),
    "Y-": (math.pi / 2, -math.pi / 2),
    "Z+": (0.0, 0.0),
    "Z-": (math.pi, 0.0),
}


def _ideal_vector(l1: float, l2: float) -> np.ndarray:
    x = np.empty(kernel.N_PARAMS)
    x[0], x[1] = l1, l2
    order = ["X+", "X-", "Y+", "Y-"]
    for k, lbl in enumerate(order):
        x[2 + 2 * k : 4 + 2 * k] = _IDEAL_ANGLES[lbl]
    for k, lbl in enumerate(order + ["Z+", "Z-"]):
        x[10 + 2 * k : 12 + 2 * k] = _IDEAL_ANGLES[lbl]
    x[22:34] = 1.0
    return x


def _moment_channel(cs: ConstraintSet) -> tuple[float, float]:
    l1 = float(np.clip(cs.corr[2, 2], -1.0, 1.0))
    l2 = math.sqrt(max(quantity_c(cs.corr), 0.0) / 2.0)
    l2 = min(l2, (1.0 + l1) / 2.0)
    return l1, l2


def _anchors(cs: ConstraintSet) -> list[np.ndarray]:
    """Ideal calibration plus measured-moment channel and rotation estimates."""
    l1, l2 = _moment_channel(cs)
    base = _ideal_vector(l1, l2)
    anchors = [base]
    alpha = math.atan2(cs.corr[0, 1], cs.corr[0, 0])
    eff = np.concatenate(
        [
            cs.prep_prob / max(cs.prep_prob[0], 1e-9),
            cs.det_prob / max(cs.det_prob[0], 1e-9),
        ]
    )
    for sign in (1.0, -1.0):
        rotated = base.copy()
        rotated[3:10:2] += sign * alpha  # preparation azimuths
        rotated[22:34] = np.clip(eff, *_EFF_BOUNDS)
        rotated[22] = 1.0
        rotated[28] = 1.0
        anchors.append(rotated)
    return anchors


def urfi_problem(
    cs: ConstraintSet, cfg: AnalysisConfig
) -> ConstrainedProblem:
    """Assemble the 34-parameter constrained problem for a constraint set."""
    values = cs.values_vector()
    stds = cs.std_vector()
    active = cs.active_vector().copy()
    family = np.concatenate(
        [
            np.full(9, cfg.use_correlators),
            np.full(6, cfg.use_prep_probs),
            np.full(6, cfg.use_det_probs),
        ]
    )
    active &= family

    lower = np.full(kernel.N_CONSTRAINTS, -np.inf)
    upper = np.full(kernel.N_CONSTRAINTS, np.inf)
    lower[:21] = np.where(active, values - cfg.sigma * stds, -np.inf)
    upper[:21] = np.where(active, values + cfg.sigma * stds, np.inf)
    lower[21:] = 0.0  # channel positivity

    def objective(x: np.ndarray) -> float:
        return float(kernel.usable_entropy_raw(float(x[0]), float(x[1])))

    def penalty(x: np.ndarray, weight: float) -> float:
        return float(kernel.penalty_value(x, lower, upper, weight))

    starts = multistart_points(
        _sampling_box(), cfg.n_starts, cfg.seed,
        anchors=list(_anchors(cs)) + [np.asarray(a, dtype=float) for a in cfg.extra_anchors],
    )
    return ConstrainedProblem(
        objective=objective,
        constraints=kernel.model_constraints,
        lower=lower,
        upper=upper,
        bounds=_optimizer_bounds(),
        starts=starts,
        penalty=penalty,
    )


def urfi_rate(cs: ConstraintSet, cfg: AnalysisConfig = AnalysisConfig()) -> KeyrateResult:
    """Uncalibrated-device secret key fraction from a constraint set.

    Minimises the usable entropy of the channel parameters over all device
    and channel configurations whose model constraints stay within sigma
    standard deviations of the observed values, then subtracts the
    error-correction cost at the worst-case key-basis error rate.
    """
    problem = urfi_problem(cs, cfg)
    result = minimize(
        problem,
        MinimizeConfig(
            feas_tol=cfg.feas_tol,
            penalty_start=cfg.penalty_start,
            penalty_growth=cfg.penalty_growth,
            max_stages=cfg.max_stages,
            inner_maxiter=cfg.inner_maxiter,
        ),
    )

    if cs.corr_active[2, 2]:
        c_zz = cs.corr[2, 2] - cfg.sigma * cs.corr_std[2, 2]
        qber_bound = float(np.clip((1.0 - c_zz) / 2.0, 0.0, 1.0))
    else:
        qber_bound = 0.5  # no key-basis statistics at all

    if not result.converged:
        return KeyrateResult(
            rate=0.0, s_min=0.0, qber_bound=qber_bound, status="infeasible",
            sigma=cfg.sigma, minimizer=result.x,
        )
    s_min = float(np.clip(result.value, 0.0, 1.0))
    raw = s_min - cfg.ec_efficiency * binary_entropy(qber_bound)
    return KeyrateResult(
        rate=max(raw, 0.0),
        s_min=s_min,
        qber_bound=qber_bound,
        status="ok" if raw >= 0.0 else "clamped",
        sigma=cfg.sigma,
        minimizer=result.x,
    )
