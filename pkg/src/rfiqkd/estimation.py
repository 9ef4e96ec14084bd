"""Constraint functions and standard deviations from raw detector counts.

The raw data of one acquisition is a 6x6 matrix of counts indexed by
(preparation, detector) in BASIS_LABELS order. From it we build the 21
constraint values used by the security analysis: the 9 block correlators,
the 6 preparation probabilities and the 6 detection probabilities, each with
a binomial-model standard deviation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .devices import BASIS_LABELS
from .postprocess import RawKey

__all__ = [
    "CountMatrix",
    "ConstraintSet",
    "correlator",
    "constraints",
    "split_counts",
]

_BASES = "XYZ"


@dataclass(frozen=True)
class CountMatrix:
    """Nonnegative integer detector counts, preparations as rows, detectors as columns."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.shape != (6, 6):
            raise ValueError(f"counts must have shape (6, 6), got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if np.abs(arr - rounded).max() > 0:
                raise ValueError("counts must be integers")
            arr = rounded
        if (arr < 0).any():
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", arr.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def block(self, prep_basis: str, det_basis: str) -> np.ndarray:
        """2x2 sub-block [[m++, m+-], [m-+, m--]] for one basis pair."""
        i = 2 * _BASES.index(prep_basis)
        j = 2 * _BASES.index(det_basis)
        return self.counts[i : i + 2, j : j + 2]

    def scaled(self, factor: int) -> "CountMatrix":
        return CountMatrix(self.counts * int(factor))

    def swap_det_signs(self, basis: str) -> "CountMatrix":
        """Relabel the two detectors of one basis (a classical bit flip)."""
        j = 2 * _BASES.index(basis)
        out = self.counts.copy()
        out[:, [j, j + 1]] = out[:, [j + 1, j]]
        return CountMatrix(out)

    # -- serialisation ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "prep_order": list(BASIS_LABELS),
            "det_order": list(BASIS_LABELS),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CountMatrix":
        for key in ("prep_order", "det_order"):
            order = d.get(key, list(BASIS_LABELS))
            if list(order) != list(BASIS_LABELS):
                raise ValueError(f"{key} must be {list(BASIS_LABELS)}, got {order}")
        return cls(np.asarray(d["counts"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "CountMatrix":
        return cls.from_json_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BASIS_LABELS)
        for row in self.counts:
            writer.writerow([int(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != list(BASIS_LABELS):
            raise ValueError(f"CSV header must be {','.join(BASIS_LABELS)}")
        data = [[int(v) for v in row] for row in rows[1:] if row]
        return cls(np.asarray(data))


@dataclass(frozen=True)
class ConstraintSet:
    """The 21 constraint values and their standard deviations.

    corr[a, b] is the correlator for preparing in basis a and detecting in
    basis b (a, b indexing X, Y, Z). corr_active marks blocks with at least
    one count; empty blocks simply contribute no constraint. prep_prob and
    det_prob each sum to 1.
    """

    corr: np.ndarray
    corr_std: np.ndarray
    corr_active: np.ndarray
    prep_prob: np.ndarray
    prep_std: np.ndarray
    det_prob: np.ndarray
    det_std: np.ndarray

    def values_vector(self) -> np.ndarray:
        """All 21 constraint values: correlators row-major, then prep, then det."""
        return np.concatenate([self.corr.ravel(), self.prep_prob, self.det_prob])

    def std_vector(self) -> np.ndarray:
        return np.concatenate([self.corr_std.ravel(), self.prep_std, self.det_std])

    def active_vector(self) -> np.ndarray:
        return np.concatenate([self.corr_active.ravel(), np.ones(12, dtype=bool)])

    def correlator(self, prep_basis: str, det_basis: str) -> float:
        return float(self.corr[_BASES.index(prep_basis), _BASES.index(det_basis)])

    def to_json_dict(self) -> dict:
        return {
            "correlators": self.corr.tolist(),
            "correlator_std": self.corr_std.tolist(),
            "correlator_active": self.corr_active.tolist(),
            "prep_prob": self.prep_prob.tolist(),
            "prep_std": self.prep_std.tolist(),
            "det_prob": self.det_prob.tolist(),
            "det_std": self.det_std.tolist(),
        }


def correlator(m: CountMatrix, prep_basis: str, det_basis: str) -> float:
    """Block correlator (m++ + m-- - m+- - m-+) / (block total)."""
    b = m.block(prep_basis, det_basis).astype(float)
    total = b.sum()
    if total <= 0:
        raise ZeroDivisionError(
            f"no counts in block ({prep_basis}, {det_basis}); correlator undefined"
        )
    return float((b[0, 0] + b[1, 1] - b[0, 1] - b[1, 0]) / total)


def _correlator_std(block: np.ndarray) -> float:
    b = block.astype(float)
    same = b[0, 0] + b[1, 1]
    diff = b[0, 1] + b[1, 0]
    total = same + diff
    return float(np.sqrt(4.0 * same * diff / total**3))


def constraints(m: CountMatrix) -> ConstraintSet:
    """All 21 constraint values and standard deviations from a count matrix.

    Correlator deviations follow the binomial model within each 4-cell
    block; preparation and detection probabilities get binomial deviations
    against the grand total. Empty blocks are marked inactive instead of
    raising.
    """
    n0 = m.total
    if n0 <= 0:
        raise ValueError("count matrix is empty")
    corr = np.zeros((3, 3))
    corr_std = np.zeros((3, 3))
    active = np.zeros((3, 3), dtype=bool)
    for a, pa in enumerate(_BASES):
        for b, pb in enumerate(_BASES):
            block = m.block(pa, pb)
            if block.sum() == 0:
                continue
            corr[a, b] = correlator(m, pa, pb)
            corr_std[a, b] = _correlator_std(block)
            active[a, b] = True

    prep_counts = m.counts.sum(axis=1).astype(float)
    det_counts = m.counts.sum(axis=0).astype(float)
    prep_prob = prep_counts / n0
    det_prob = det_counts / n0
    prep_std = np.sqrt((n0 - prep_counts) * prep_counts / float(n0) ** 3)
    det_std = np.sqrt((n0 - det_counts) * det_counts / float(n0) ** 3)
    return ConstraintSet(
        corr=corr,
        corr_std=corr_std,
        corr_active=active,
        prep_prob=prep_prob,
        prep_std=prep_std,
        det_prob=det_prob,
        det_std=det_std,
    )


def split_counts(
    events: np.ndarray, fraction: float, seed: int
) -> tuple[RawKey, CountMatrix]:
    """Partition detection events into a raw key and a parameter-estimation matrix.

    Events where both the preparation and the detection used the key basis
    are assigned to the raw key with the given probability (seeded, so the
    partition is reproducible); everything else, plus the unassigned
    key-basis events, is aggregated into the returned CountMatrix.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    prep = np.asarray(events["prep"], dtype=np.int64)
    det = np.asarray(events["det"], dtype=np.int64)
    is_key = (prep >= 4) & (det >= 4)
    rng = np.random.default_rng(seed)
    to_key = is_key & (rng.random(len(prep)) < fraction)

    alice = (prep[to_key] - 4).astype(np.uint8)
    bob = (det[to_key] - 4).astype(np.uint8)

    keep = ~to_key
    counts = np.zeros((6, 6), dtype=np.int64)
    np.add.at(counts, (prep[keep], det[keep]), 1)
    return RawKey(alice, bob), CountMatrix(counts)
