"""Pure numpy fallback for the hot model-evaluation kernel.

Mirrors the compiled extension exactly; see kernel.py for the interface
contract and the parameter-vector layout.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

N_PARAMS = 34
N_CONSTRAINTS = 23  # 9 correlators, 6 prep probs, 6 det probs, 2 positivity rows

_LOG2 = float(np.log(2.0))


def _xlog2x(x: float) -> float:
    if x <= 0.0:
        return 0.0
    return x * np.log(x) / _LOG2


def usable_entropy_raw(l1: float, l2: float) -> float:
    """Unclamped objective value; safe for slightly unphysical arguments."""
    e1 = 0.25 * (1.0 - l1)
    e3 = 0.25 * (1.0 + l1 - 2.0 * l2)
    e4 = 0.25 * (1.0 + l1 + 2.0 * l2)
    t = min(max(2.0 * e1, 0.0), 1.0)
    h = -_xlog2x(t) - _xlog2x(1.0 - t)
    return 1.0 + h + 2.0 * _xlog2x(e1) + _xlog2x(e3) + _xlog2x(e4)


def _directions(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    prep = np.empty((6, 3))
    th = x[2:10:2]
    ph = x[3:10:2]
    sp = np.sin(th)
    prep[:4, 0] = sp * np.cos(ph)
    prep[:4, 1] = sp * np.sin(ph)
    prep[:4, 2] = np.cos(th)
    prep[4] = (0.0, 0.0, 1.0)
    prep[5] = (0.0, 0.0, -1.0)
    th = x[10:22:2]
    ph = x[11:22:2]
    sp = np.sin(th)
    meas = np.empty((6, 3))
    meas[:, 0] = sp * np.cos(ph)
    meas[:, 1] = sp * np.sin(ph)
    meas[:, 2] = np.cos(th)
    return prep, meas


def model_constraints(x: np.ndarray) -> np.ndarray:
    """Constraint vector of the device model at packed parameters x."""
    x = np.asarray(x, dtype=float)
    l1, l2 = x[0], x[1]
    prep, meas = _directions(x)
    t1 = x[22:28]
    t2 = x[28:34]

    corr = l2 * (np.outer(prep[:, 0], meas[:, 0]) + np.outer(prep[:, 1], meas[:, 1]))
    corr += l1 * np.outer(prep[:, 2], meas[:, 2])
    q = np.outer(t1, t2) * (1.0 + corr)
    total = q.sum()
    out = np.empty(N_CONSTRAINTS)
    if total <= 0.0:
        out[:21] = 0.0
    else:
        blocks = q.reshape(3, 2, 3, 2)
        same = blocks[:, 0, :, 0] + blocks[:, 1, :, 1]
        diff = blocks[:, 0, :, 1] + blocks[:, 1, :, 0]
        block_tot = same + diff
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(block_tot > 0.0, (same - diff) / block_tot, 0.0)
        out[0:9] = c.ravel()
        out[9:15] = q.sum(axis=1) / total
        out[15:21] = q.sum(axis=0) / total
    out[21] = 1.0 + l1 - 2.0 * l2
    out[22] = 1.0 + l1 + 2.0 * l2
    return out


def penalty_value(x: np.ndarray, lower: np.ndarray, upper: np.ndarray, weight: float) -> float:
    """Fused objective plus weighted squared interval violations."""
    f = model_constraints(x)
    below = np.clip(lower - f, 0.0, None)
    above = np.clip(f - upper, 0.0, None)
    v = float(below @ below + above @ above)
    return usable_entropy_raw(float(x[0]), float(x[1])) + weight * v
