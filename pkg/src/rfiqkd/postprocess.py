"""Classical post-processing: QBER, Toeplitz privacy amplification, photon-number accounting.

Error correction itself is out of scope; its cost enters the key-rate
formulas as the Shannon-limit term h(QBER), optionally scaled by an
efficiency factor >= 1 for real codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import matmul_toeplitz

__all__ = [
    "RawKey",
    "qber",
    "toeplitz_amplify",
    "PnsConfig",
    "PnsEstimate",
    "pns_reduction",
    "throughput",
    "key_to_json",
    "key_from_json",
]


@dataclass(frozen=True)
class RawKey:
    """Sifted key-basis bit pairs held by the two terminals."""

    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.alice, dtype=np.uint8)
        b = np.asarray(self.bob, dtype=np.uint8)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("alice and bob bit sequences must be 1-d and equal length")
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)

    def __len__(self) -> int:
        return len(self.alice)


def qber(key: RawKey) -> float:
    """Fraction of disagreeing bit positions."""
    if len(key) == 0:
        raise ValueError("cannot estimate the error rate of an empty key")
    return float(np.mean(key.alice != key.bob))


def _seed_bits(seed, n: int) -> np.ndarray:
    if isinstance(seed, np.ndarray):
        bits = np.asarray(seed, dtype=np.uint8) & 1
        if bits.shape != (n,):
            raise ValueError(f"explicit Toeplitz bits must have length {n}")
        return bits
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def toeplitz_amplify(bits: np.ndarray, out_len: int, seed) -> np.ndarray:
    """Compress a bit string with a random Toeplitz matrix over GF(2).

    The m x n matrix T is defined by n + m - 1 bits s via T[i, j] =
    s[i - j + n - 1]; the output is T @ bits mod 2. `seed` may be an int, a
    numpy Generator, or an explicit array of the n + m - 1 diagonal bits.
    The product is evaluated through an FFT-based Toeplitz multiply, exact
    after integer rounding.
    """
    bits = np.asarray(bits, dtype=np.uint8) & 1
    n = bits.size
    m = int(out_len)
    if m < 0 or m > n:
        raise ValueError(f"output length {m} must lie in [0, {n}]")
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    s = _seed_bits(seed, n + m - 1)
    col = s[n - 1 : n - 1 + m].astype(float)
    row = s[:n][::-1].astype(float)
    prod = matmul_toeplitz((col, row), bits.astype(float))
    return (np.rint(prod).astype(np.int64) & 1).astype(np.uint8)


@dataclass(frozen=True)
class PnsConfig:
    """Inputs of the multi-photon (photon-number-splitting) estimate."""

    pulse_rate: float = 250e6
    mu: float = 0.05
    eta_accessible: float = 0.8
    eta_inaccessible: float = 0.2
    key_fraction: float = 0.1
    raw_key_bits: int = 200_000

    def __post_init__(self) -> None:
        if self.pulse_rate <= 0 or self.mu < 0:
            raise ValueError("pulse rate must be positive and mu nonnegative")
        for name in ("eta_accessible", "eta_inaccessible", "key_fraction"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.raw_key_bits <= 0:
            raise ValueError("raw_key_bits must be positive")


@dataclass(frozen=True)
class PnsEstimate:
    multi_photon_rate_hz: float
    tagged_click_rate_hz: float
    tagged_bits: float
    fraction_reduction: float

    def to_json_dict(self) -> dict:
        return {
            "multi_photon_rate_hz": self.multi_photon_rate_hz,
            "tagged_click_rate_hz": self.tagged_click_rate_hz,
            "tagged_bits": self.tagged_bits,
            "fraction_reduction": self.fraction_reduction,
        }


def pns_reduction(cfg: PnsConfig) -> PnsEstimate:
    """Worst-case key-fraction reduction from multi-photon pulses.

    Pulses with two or more photons (Poisson statistics) are assumed fully
    known to the eavesdropper. A splitting attack forwards one photon, so
    the surviving clicks only pass the inaccessible loss; of those, only the
    key fraction ends up in the raw key.
    """
    p_multi = 1.0 - math.exp(-cfg.mu) - cfg.mu * math.exp(-cfg.mu)
    multi_rate = cfg.pulse_rate * p_multi
    click_rate = multi_rate * cfg.eta_inaccessible
    tagged = click_rate * cfg.key_fraction  # clicks in one second of key exchange
    return PnsEstimate(
        multi_photon_rate_hz=multi_rate,
        tagged_click_rate_hz=click_rate,
        tagged_bits=tagged,
        fraction_reduction=tagged / cfg.raw_key_bits,
    )


def throughput(raw_bits: int, rate: float, pns_red: float = 0.0) -> int:
    """Secure bits extractable from raw_bits at the given secret key fraction."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    return int(math.floor(raw_bits * max(0.0, rate - pns_red)))


def key_to_json(bits: np.ndarray) -> dict:
    """Hex-encoded bit string with explicit length."""
    bits = np.asarray(bits, dtype=np.uint8) & 1
    packed = np.packbits(bits) if bits.size else np.zeros(0, dtype=np.uint8)
    return {"length": int(bits.size), "bits_hex": packed.tobytes().hex()}


def key_from_json(d: dict) -> np.ndarray:
    length = int(d["length"])
    raw = bytes.fromhex(d["bits_hex"])
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    if bits.size < length:
        raise ValueError("hex payload shorter than the declared bit length")
    return bits[:length].astype(np.uint8)
