"""Device model: preparation/measurement directions, efficiencies, click probabilities.

Six preparation channels and six detectors, one per basis and sign, each
associated with a Poincaré-sphere direction and an efficiency. The click
weight for preparing along n and detecting along r through a channel state
(l1, l2) is

    q = t1 * t2 / 4 * (1 + l2*(nx*rx + ny*ry) + l1*nz*rz)

and observable click probabilities are q normalised over all 36 cells.

Also provides Jones-calculus construction of realistic directions from
waveplate retardances and polarising-beam-splitter extinction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BlochVector, ChannelState

__all__ = [
    "BASIS_LABELS",
    "basis_index",
    "DeviceParams",
    "ideal_params",
    "click_probability",
    "click_weight_matrix",
    "click_distribution",
    "OpticsSpec",
    "waveplate_jones",
    "bloch_from_optics",
    "params_from_optics",
    "pack_params",
    "unpack_params",
    "PACKED_LENGTH",
]

BASIS_LABELS = ("X+", "X-", "Y+", "Y-", "Z+", "Z-")
_BASES = "XYZ"
_SIGNS = "+-"

# packed parameter vector: 8 preparation angles (X+, X-, Y+, Y- as polar,
# azimuth pairs; the two key-basis preparations are pinned to the poles),
# 12 measurement angles, 6 preparation efficiencies, 6 detector efficiencies
PACKED_LENGTH = 32


def basis_index(basis: str, sign: str) -> int:
    """Map a basis letter and sign to the canonical channel index 0..5."""
    return 2 * _BASES.index(basis) + _SIGNS.index(sign)


@dataclass(frozen=True)
class DeviceParams:
    """Directions and efficiencies of the six preparations and six detectors.

    Rows follow BASIS_LABELS order. Direction norms must not exceed 1;
    shortened vectors encode partially polarised preparations (for instance
    from finite beam-splitter extinction) and are allowed here. The packed
    form used by the minimiser additionally requires unit vectors with the
    key-basis preparations pinned to the poles; see pack_params.
    """

    prep_dirs: np.ndarray
    meas_dirs: np.ndarray
    prep_eff: np.ndarray = field(default_factory=lambda: np.ones(6))
    meas_eff: np.ndarray = field(default_factory=lambda: np.ones(6))

    def __post_init__(self) -> None:
        for name in ("prep_dirs", "meas_dirs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (6, 3):
                raise ValueError(f"{name} must have shape (6, 3)")
            if np.linalg.norm(arr, axis=1).max() > 1.0 + 1e-12:
                raise ValueError(f"{name} contains a vector with norm > 1")
            object.__setattr__(self, name, arr)
        for name in ("prep_eff", "meas_eff"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (6,):
                raise ValueError(f"{name} must have shape (6,)")
            if (arr <= 0).any():
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, arr)

    def to_json_dict(self) -> dict:
        return {
            "prep_dirs": self.prep_dirs.tolist(),
            "meas_dirs": self.meas_dirs.tolist(),
            "prep_eff": self.prep_eff.tolist(),
            "meas_eff": self.meas_eff.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DeviceParams":
        return cls(
            prep_dirs=np.asarray(d["prep_dirs"], dtype=float),
            meas_dirs=np.asarray(d["meas_dirs"], dtype=float),
            prep_eff=np.asarray(d.get("prep_eff", np.ones(6)), dtype=float),
            meas_eff=np.asarray(d.get("meas_eff", np.ones(6)), dtype=float),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "DeviceParams":
        return cls.from_json_dict(json.loads(text))


def _ideal_directions() -> np.ndarray:
    return np.array(
        [
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ],
        dtype=float,
    )


def ideal_params() -> DeviceParams:
    """Perfectly calibrated device: orthonormal bases, unit efficiencies."""
    return DeviceParams(prep_dirs=_ideal_directions(), meas_dirs=_ideal_directions())


def click_weight_matrix(params: DeviceParams, state: ChannelState) -> np.ndarray:
    """Unnormalised 6x6 click weights q, preparations as rows, detectors as columns."""
    n = params.prep_dirs
    r = params.meas_dirs
    l1, l2 = state.lambda1, state.lambda2
    corr = l2 * (np.outer(n[:, 0], r[:, 0]) + np.outer(n[:, 1], r[:, 1]))
    corr += l1 * np.outer(n[:, 2], r[:, 2])
    return np.outer(params.prep_eff, params.meas_eff) / 4.0 * (1.0 + corr)


def click_probability(
    params: DeviceParams, state: ChannelState, prep_basis: str, prep_sign: str,
    det_basis: str, det_sign: str,
) -> float:
    """Single unnormalised click weight q for one preparation/detector pair."""
    i = basis_index(prep_basis, prep_sign)
    j = basis_index(det_basis, det_sign)
    n = params.prep_dirs[i]
    r = params.meas_dirs[j]
    corr = state.lambda2 * (n[0] * r[0] + n[1] * r[1]) + state.lambda1 * n[2] * r[2]
    return float(params.prep_eff[i] * params.meas_eff[j] / 4.0 * (1.0 + corr))


def click_distribution(params: DeviceParams, state: ChannelState) -> np.ndarray:
    """Normalised 6x6 click probability matrix p = q / sum(q)."""
    q = click_weight_matrix(params, state)
    total = q.sum()
    if total <= 0.0:
        raise ValueError("all click weights vanish; cannot normalise")
    return q / total


# ---------------------------------------------------------------------------
# Jones-calculus construction of realistic directions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpticsSpec:
    """Waveplate retardances (in waves), mount angles and PBS extinction.

    An infinite extinction ratio (math.inf) models a perfect polariser.
    """

    hwp_retardance: float = 0.535
    qwp_retardance: float = 0.265
    pbs_extinction_db: float = 13.0
    hwp_angle_deg: float = 22.5
    qwp_angle_deg: float = 45.0

    def __post_init__(self) -> None:
        if not 0.0 < self.hwp_retardance < 1.0 or not 0.0 < self.qwp_retardance < 1.0:
            raise ValueError("retardances must lie in (0, 1) waves")
        if self.pbs_extinction_db <= 0.0:
            raise ValueError("extinction must be positive (in dB)")

    def leak_fraction(self) -> float:
        """Orthogonal-polarisation intensity leak epsilon of the PBS."""
        if math.isinf(self.pbs_extinction_db):
            return 0.0
        return 10.0 ** (-self.pbs_extinction_db / 10.0)


def waveplate_jones(retardance_waves: float, angle_deg: float) -> np.ndarray:
    """Jones matrix of a linear retarder with its fast axis at angle_deg."""
    gamma = 2.0 * math.pi * retardance_waves
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    # fast axis leads; with this sign the ideal quarter-wave plate at 45
    # degrees sends horizontal input to the +z pole
    core = np.diag([np.exp(0.5j * gamma), np.exp(-0.5j * gamma)])
    return rot @ core @ rot.T


def _stokes_direction(jones: np.ndarray) -> np.ndarray:
    jx, jy = jones
    s0 = abs(jx) ** 2 + abs(jy) ** 2
    s1 = abs(jx) ** 2 - abs(jy) ** 2
    s2 = 2.0 * (jx.conjugate() * jy).real
    s3 = 2.0 * (jx.conjugate() * jy).imag
    return np.array([s1, s2, s3]) / s0


def bloch_from_optics(spec: OpticsSpec, arm: str, sign: str) -> BlochVector:
    """Direction produced by one arm of the optical assembly.

    The PBS output (horizontal for '+', vertical for '-') propagates through
    the arm's waveplate: none for X, the half-wave plate for Y, the
    quarter-wave plate for Z. Finite extinction leaves a fraction eps of the
    orthogonal polarisation in the beam, shortening the Bloch vector by
    (1 - eps) / (1 + eps); the waveplate then rotates the shortened vector.
    """
    if arm not in _BASES:
        raise ValueError(f"arm must be one of X, Y, Z, got {arm!r}")
    if sign not in _SIGNS:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    port = np.array([1.0, 0.0], dtype=complex) if sign == "+" else np.array([0.0, 1.0], dtype=complex)
    if arm == "X":
        out = port
    elif arm == "Y":
        out = waveplate_jones(spec.hwp_retardance, spec.hwp_angle_deg) @ port
    else:
        out = waveplate_jones(spec.qwp_retardance, spec.qwp_angle_deg) @ port
    eps = spec.leak_fraction()
    shorten = (1.0 - eps) / (1.0 + eps)
    return BlochVector.from_array(shorten * _stokes_direction(out))


def params_from_optics(
    prep_spec: OpticsSpec, meas_spec: OpticsSpec | None = None
) -> DeviceParams:
    """Device built from optics on both sides.

    The receiver mirrors the emitter (waveplates before the analysing PBS),
    so the same Jones construction applies. Pass a separate meas_spec to give
    the two sides different imperfections, for instance extinction filtering
    on the source only: replace(spec, pbs_extinction_db=math.inf).
    """
    if meas_spec is None:
        meas_spec = prep_spec
    prep = np.array(
        [bloch_from_optics(prep_spec, b, s).as_array() for b in _BASES for s in _SIGNS]
    )
    meas = np.array(
        [bloch_from_optics(meas_spec, b, s).as_array() for b in _BASES for s in _SIGNS]
    )
    return DeviceParams(prep_dirs=prep, meas_dirs=meas)


def ideal_optics() -> OpticsSpec:
    """Exact half/quarter-wave retardances and a perfect PBS."""
    return OpticsSpec(hwp_retardance=0.5, qwp_retardance=0.25, pbs_extinction_db=math.inf)


# ---------------------------------------------------------------------------
# Packed parameter vector for the minimiser
# ---------------------------------------------------------------------------


def _angles_from_unit(v: np.ndarray) -> tuple[float, float]:
    polar = math.acos(min(max(float(v[2]), -1.0), 1.0))
    azimuth = math.atan2(float(v[1]), float(v[0]))
    return polar, azimuth


def _unit_from_angles(polar: float, azimuth: float) -> np.ndarray:
    sp = math.sin(polar)
    return np.array([sp * math.cos(azimuth), sp * math.sin(azimuth), math.cos(polar)])


def pack_params(params: DeviceParams) -> np.ndarray:
    """Flatten a calibration-model device into a length-32 vector.

    Directions are stored as (polar, azimuth) pairs, so they must be unit
    vectors, and the two key-basis preparations must sit exactly at the
    poles (they are pinned, not free, and are excluded from the vector).
    """
    norms_p = np.linalg.norm(params.prep_dirs, axis=1)
    norms_m = np.linalg.norm(params.meas_dirs, axis=1)
    if np.abs(norms_p - 1.0).max() > 1e-6 or np.abs(norms_m - 1.0).max() > 1e-6:
        raise ValueError("packed parameters require unit direction vectors")
    if not np.array_equal(params.prep_dirs[4], [0.0, 0.0, 1.0]) or not np.array_equal(
        params.prep_dirs[5], [0.0, 0.0, -1.0]
    ):
        raise ValueError("key-basis preparations must be pinned to (0, 0, +-1)")
    vec = np.empty(PACKED_LENGTH)
    for k in range(4):
        vec[2 * k : 2 * k + 2] = _angles_from_unit(params.prep_dirs[k])
    for k in range(6):
        vec[8 + 2 * k : 10 + 2 * k] = _angles_from_unit(params.meas_dirs[k])
    vec[20:26] = params.prep_eff
    vec[26:32] = params.meas_eff
    return vec


def unpack_params(vec: np.ndarray) -> DeviceParams:
    """Inverse of pack_params."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (PACKED_LENGTH,):
        raise ValueError(f"expected a vector of length {PACKED_LENGTH}")
    prep = np.empty((6, 3))
    for k in range(4):
        prep[k] = _unit_from_angles(vec[2 * k], vec[2 * k + 1])
    prep[4] = [0.0, 0.0, 1.0]
    prep[5] = [0.0, 0.0, -1.0]
    meas = np.empty((6, 3))
    for k in range(6):
        meas[k] = _unit_from_angles(vec[8 + 2 * k], vec[9 + 2 * k])
    return DeviceParams(
        prep_dirs=prep, meas_dirs=meas, prep_eff=vec[20:26].copy(), meas_eff=vec[26:32].copy()
    )
