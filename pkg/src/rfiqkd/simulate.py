"""Monte Carlo generation of detection events and count matrices.

Models a faint-pulse polarisation link: one of six preparations fires per
pulse, photons survive coupling, spectral filtering and detector efficiency,
the surviving ones are routed to one of six detectors according to the
single-photon click distribution, dark counts are mixed in, and counts that
fall within the discard window of a preceding count are dropped.

Two modes exist. The pulse-level mode draws every pulse and produces a
time-ordered event list (needed for dead-time realism and raw-key
splitting). The multinomial mode draws the aggregated count matrix directly
from the exact cell distribution and is the fast path for angle sweeps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .core import BlochVector
from .devices import BASIS_LABELS, DeviceParams
from .estimation import CountMatrix

__all__ = [
    "EVENT_DTYPE",
    "SourceConfig",
    "ChannelConfig",
    "DetectorConfig",
    "apply_channel",
    "expected_cell_rates",
    "simulate_counts",
    "sample_count_matrix",
    "deadtime_filter",
    "hwp_sweep_angles",
    "events_to_csv",
    "events_from_csv",
]

EVENT_DTYPE = np.dtype(
    [("time_ns", np.float64), ("prep", np.int8), ("det", np.int8), ("is_dark", np.bool_)]
)


@dataclass(frozen=True)
class SourceConfig:
    """Faint-pulse source: repetition rate, mean photon number, pulse budget."""

    pulse_rate: float = 250e6
    mu: float = 0.05
    n_pulses: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be at least 1")
        if self.pulse_rate <= 0:
            raise ValueError("pulse_rate must be positive")


@dataclass(frozen=True)
class ChannelConfig:
    """Free-space channel: equatorial rotation, depolarisation, pole flip.

    rotation is the Poincaré-sphere angle (radians) applied to the x and y
    components of every transmitted state; z_flip models the handedness
    inversion of a half-wave plate in the beam path.
    """

    rotation: float = 0.0
    depolarization: float = 0.0
    z_flip: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.depolarization <= 1.0:
            raise ValueError("depolarization must lie in [0, 1]")


@dataclass(frozen=True)
class DetectorConfig:
    """Receiver losses, dark counts, and the dead-time discard window."""

    efficiency: float = 0.45
    coupling: float = 0.8
    filter_transmission: float = 0.7
    dark_rate: float = 400.0
    dead_time_ns: float = 50.0
    discard_window_ns: float = 60.0

    def __post_init__(self) -> None:
        for name in ("efficiency", "coupling", "filter_transmission"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.dark_rate < 0 or self.dead_time_ns < 0 or self.discard_window_ns < 0:
            raise ValueError("rates and time windows must be nonnegative")

    @property
    def survival(self) -> float:
        return self.efficiency * self.coupling * self.filter_transmission


def apply_channel(v, ch: ChannelConfig):
    """Transform a Bloch vector through the channel.

    Accepts a BlochVector or an (..., 3) array and returns the same type.
    """
    arr = v.as_array() if isinstance(v, BlochVector) else np.asarray(v, dtype=float)
    c, s = math.cos(ch.rotation), math.sin(ch.rotation)
    out = np.empty_like(arr)
    out[..., 0] = c * arr[..., 0] - s * arr[..., 1]
    out[..., 1] = s * arr[..., 0] + c * arr[..., 1]
    out[..., 2] = -arr[..., 2] if ch.z_flip else arr[..., 2]
    out *= 1.0 - ch.depolarization
    if isinstance(v, BlochVector):
        return BlochVector.from_array(out)
    return out


def _detector_weights(dev: DeviceParams, ch: ChannelConfig) -> np.ndarray:
    """Per-preparation detector assignment probabilities, rows normalised."""
    sent = apply_channel(dev.prep_dirs, ch)
    overlap = 1.0 + sent @ dev.meas_dirs.T
    w = overlap * dev.meas_eff[np.newaxis, :]
    return w / w.sum(axis=1, keepdims=True)


def expected_cell_rates(
    dev: DeviceParams, src: SourceConfig, ch: ChannelConfig, det: DetectorConfig
) -> np.ndarray:
    """Expected 6x6 counts: signal through the click model plus dark counts."""
    weights = _detector_weights(dev, ch)
    per_prep_pulses = src.n_pulses / 6.0
    mean_detected = src.mu * dev.prep_eff * det.survival
    signal = per_prep_pulses * mean_detected[:, np.newaxis] * weights
    dark_per_cell = src.n_pulses * (det.dark_rate / src.pulse_rate) / 6.0
    return signal + dark_per_cell


def sample_count_matrix(
    dev: DeviceParams, src: SourceConfig, ch: ChannelConfig, det: DetectorConfig,
    rng: np.random.Generator | None = None,
) -> CountMatrix:
    """Fast mode: multinomial draw of the count matrix from the exact cell
    distribution. Dead time is not modelled here."""
    if rng is None:
        rng = np.random.default_rng(src.seed)
    rates = expected_cell_rates(dev, src, ch, det)
    total_mean = rates.sum()
    n = int(rng.poisson(total_mean))
    cells = rng.multinomial(n, (rates / total_mean).ravel()).reshape(6, 6)
    return CountMatrix(cells)


def simulate_counts(
    dev: DeviceParams, src: SourceConfig, ch: ChannelConfig, det: DetectorConfig
) -> tuple[np.ndarray, CountMatrix]:
    """Pulse-level simulation.

    Returns the time-ordered events that survive the discard window and the
    matching aggregated count matrix. Deterministic for a given seed.
    """
    rng = np.random.default_rng(src.seed)
    slot_ns = 1e9 / src.pulse_rate
    preps = rng.integers(0, 6, size=src.n_pulses, dtype=np.int8)

    # detected photons per pulse: Poisson thinned by the loss chain
    mean_detected = src.mu * dev.prep_eff * det.survival
    n_clicks = rng.poisson(mean_detected[preps])
    pulse_idx = np.repeat(np.arange(src.n_pulses, dtype=np.int64), n_clicks)
    click_prep = preps[pulse_idx]
    click_time = pulse_idx * slot_ns

    weights = _detector_weights(dev, ch)
    click_det = np.empty(pulse_idx.size, dtype=np.int8)
    for u in range(6):
        mask = click_prep == u
        if mask.any():
            cdf = np.cumsum(weights[u])
            cdf[-1] = 1.0
            click_det[mask] = np.searchsorted(cdf, rng.random(int(mask.sum())), side="right")

    # dark counts: uniform in time, labelled with the active preparation
    duration_ns = src.n_pulses * slot_ns
    mean_dark = src.n_pulses * det.dark_rate / src.pulse_rate
    dark_parts = []
    for d in range(6):
        k = int(rng.poisson(mean_dark))
        if k == 0:
            continue
        t = rng.random(k) * duration_ns
        slot = np.minimum((t / slot_ns).astype(np.int64), src.n_pulses - 1)
        part = np.empty(k, dtype=EVENT_DTYPE)
        part["time_ns"] = t
        part["prep"] = preps[slot]
        part["det"] = d
        part["is_dark"] = True
        dark_parts.append(part)

    signal = np.empty(pulse_idx.size, dtype=EVENT_DTYPE)
    signal["time_ns"] = click_time
    signal["prep"] = click_prep
    signal["det"] = click_det
    signal["is_dark"] = False

    events = np.concatenate([signal, *dark_parts]) if dark_parts else signal
    events = events[np.argsort(events["time_ns"], kind="stable")]
    events = deadtime_filter(events, det)

    counts = np.zeros((6, 6), dtype=np.int64)
    np.add.at(counts, (events["prep"].astype(np.int64), events["det"].astype(np.int64)), 1)
    return events, CountMatrix(counts)


def deadtime_filter(events: np.ndarray, det: DetectorConfig) -> np.ndarray:
    """Drop every count within the discard window of the preceding count.

    Comparison is against the immediately preceding recorded count, kept or
    not, since a firing detector enters dead time either way. Idempotent.
    """
    t = np.asarray(events["time_ns"], dtype=float)
    if t.size <= 1:
        return events
    gaps = np.diff(t)
    if (gaps < 0).any():
        raise ValueError("events must be ordered by time")
    keep = np.concatenate([[True], gaps >= det.discard_window_ns])
    return events[keep]


def hwp_sweep_angles(n: int) -> list[ChannelConfig]:
    """Channel configurations of a half-wave-plate sweep.

    n physical mount angles uniform over [0, 180) degrees; each maps to a
    Poincaré rotation of four times the physical angle with the handedness
    flip of a half-wave plate.
    """
    if n < 2:
        raise ValueError("a sweep needs at least two angles")
    return [
        ChannelConfig(rotation=4.0 * math.radians(180.0 * i / n), z_flip=True)
        for i in range(n)
    ]


# ---------------------------------------------------------------------------
# event log serialisation
# ---------------------------------------------------------------------------

_EVENT_HEADER = ["time_ns", "prep_basis", "prep_sign", "det_basis", "det_sign", "is_dark"]


def events_to_csv(events: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_EVENT_HEADER)
    for ev in events:
        prep = BASIS_LABELS[int(ev["prep"])]
        det = BASIS_LABELS[int(ev["det"])]
        writer.writerow(
            [repr(float(ev["time_ns"])), prep[0], prep[1], det[0], det[1], int(ev["is_dark"])]
        )
    return buf.getvalue()


def events_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != _EVENT_HEADER:
        raise ValueError(f"event CSV header must be {','.join(_EVENT_HEADER)}")
    out = np.empty(len(rows) - 1, dtype=EVENT_DTYPE)
    for i, row in enumerate(rows[1:]):
        out[i]["time_ns"] = float(row[0])
        out[i]["prep"] = BASIS_LABELS.index(row[1] + row[2])
        out[i]["det"] = BASIS_LABELS.index(row[3] + row[4])
        out[i]["is_dark"] = bool(int(row[5]))
    return out
