"""Qubit and two-qubit linear algebra for the security analysis.

Everything here operates on polarisation qubits: Bloch (Poincaré) vectors,
4x4 two-qubit density matrices in the computational basis |00>,|01>,|10>,|11>
(first factor is the sender's qubit), von Neumann and relative entropies in
bits, and the dephasing super-operators that reduce a generic channel state
to the two-parameter family used by the key-rate minimisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BlochVector",
    "ChannelState",
    "binary_entropy",
    "channel_density",
    "channel_eigenvalues",
    "usable_entropy",
    "von_neumann_entropy",
    "relative_entropy",
    "key_basis_dephase",
    "dephase_in_eigenbasis",
    "channel_project_matrix",
    "project_to_channel",
    "check_density",
    "random_density",
]

_EIG_CUTOFF = 1e-12  # eigenvalues below this are treated as exact zeros

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# Key-basis difference operator (z on sender minus z on receiver) and the
# correlated-x operator. Dephasing in their eigenbases maps any two-qubit
# state onto the two-parameter channel family.
SIGMA_DIFF_Z = np.kron(PAULI_Z, IDENTITY_2) - np.kron(IDENTITY_2, PAULI_Z)
SIGMA_XX = np.kron(PAULI_X, PAULI_X)


def _xlog2x(x: float) -> float:
    """x * log2(x) with the continuous extension 0 at x <= 0."""
    if x <= 0.0:
        return 0.0
    return x * math.log2(x)


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy h(x) = -x log2 x - (1-x) log2 (1-x), in bits.

    Raises ValueError outside [0, 1].
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy argument {x} outside [0, 1]")
    return -_xlog2x(x) - _xlog2x(1.0 - x)


@dataclass(frozen=True)
class BlochVector:
    """A point in or on the Poincaré sphere. Norm < 1 means partial polarisation."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if self.norm() > 1.0 + 1e-12:
            raise ValueError(f"Bloch vector {self} has norm > 1")

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, v: np.ndarray) -> "BlochVector":
        return cls(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class ChannelState:
    """Two-parameter channel state.

    lambda1 is the key-basis (zz) correlation, lambda2 the equatorial (xx/yy)
    correlation of the dephased two-qubit state. Positivity of the density
    matrix requires 2|lambda2| <= 1 + lambda1.
    """

    lambda1: float
    lambda2: float

    def __post_init__(self) -> None:
        if abs(self.lambda1) > 1.0 + 1e-12:
            raise ValueError(f"lambda1 = {self.lambda1} outside [-1, 1]")
        if 2.0 * abs(self.lambda2) > 1.0 + self.lambda1 + 1e-12:
            raise ValueError(
                f"channel state ({self.lambda1}, {self.lambda2}) is not positive"
            )

    def canonical(self) -> "ChannelState":
        """Same state with the sign convention lambda2 >= 0."""
        return ChannelState(self.lambda1, abs(self.lambda2))


def channel_density(state: ChannelState) -> np.ndarray:
    """4x4 density matrix of the two-parameter channel state.

    Diagonal (1+l1, 1-l1, 1-l1, 1+l1)/4 with corner elements l2/2 coupling
    |00> and |11>.
    """
    l1, l2 = state.lambda1, state.lambda2
    rho = np.diag([1 + l1, 1 - l1, 1 - l1, 1 + l1]).astype(complex) / 4.0
    rho[0, 3] = l2 / 2.0
    rho[3, 0] = l2 / 2.0
    return rho


def channel_eigenvalues(state: ChannelState) -> tuple[float, float, float, float]:
    """Eigenvalues of the channel density matrix, in closed form.

    Returns (e1, e2, e3, e4) = ((1-l1)/4, (1-l1)/4, (1+l1-2*l2)/4,
    (1+l1+2*l2)/4). They are nonnegative and sum to 1 for a valid state.
    """
    l1, l2 = state.lambda1, state.lambda2
    e1 = (1.0 - l1) / 4.0
    return (e1, e1, (1.0 + l1 - 2.0 * l2) / 4.0, (1.0 + l1 + 2.0 * l2) / 4.0)


def usable_entropy(state: ChannelState) -> float:
    """Entropy of the key bit conditioned on the eavesdropper, in bits.

    Equals the relative entropy between the channel state and its key-basis
    dephased version, which in closed form is

        1 + h(2*e1) + sum_i e_i log2 e_i

    with the channel eigenvalues e_i. Even in lambda2; clamped to [0, 1].
    """
    canon = state.canonical()
    e1, _, e3, e4 = channel_eigenvalues(canon)
    s = 1.0 + binary_entropy(min(max(2.0 * e1, 0.0), 1.0))
    s += 2.0 * _xlog2x(e1) + _xlog2x(e3) + _xlog2x(e4)
    return min(max(s, 0.0), 1.0)


def check_density(rho: np.ndarray, atol: float = 1e-12) -> None:
    """Validate Hermiticity, unit trace and positivity; raise ValueError if violated."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > max(atol, 1e-12):
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -max(atol, 1e-9):
        raise ValueError("density matrix has a negative eigenvalue")


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr rho log2 rho in bits, ignoring eigenvalues below cutoff."""
    evals = np.linalg.eigvalsh(rho)
    return float(-sum(_xlog2x(float(v)) for v in evals if v > _EIG_CUTOFF))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy S(rho || sigma) = Tr rho (log2 rho - log2 sigma), bits.

    Computed by eigendecomposition of both arguments. Eigenvalues below the
    cutoff count as exact zeros. If rho has weight outside the support of
    sigma (beyond 1e-9), the value is +inf.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    w_r = np.linalg.eigvalsh(rho)
    term_rho = sum(_xlog2x(float(v)) for v in w_r if v > _EIG_CUTOFF)

    w_s, v_s = np.linalg.eigh(sigma)
    # weight of rho along each eigenvector of sigma
    overlap = np.einsum("ij,jk,ki->i", v_s.conj().T, rho, v_s).real
    outside = float(overlap[w_s <= _EIG_CUTOFF].sum())
    if outside > 1e-9:
        return math.inf
    term_sigma = float(
        sum(o * math.log2(float(v)) for o, v in zip(overlap, w_s) if v > _EIG_CUTOFF)
    )
    return float(term_rho - term_sigma)


def key_basis_dephase(rho: np.ndarray) -> np.ndarray:
    """Dephase in the sender's key basis: P0 rho P0 + P1 rho P1.

    Zeroes every element connecting different z eigenstates of the first
    qubit. Idempotent and trace preserving.
    """
    out = np.array(rho, dtype=complex)
    out[0:2, 2:4] = 0.0
    out[2:4, 0:2] = 0.0
    return out


def dephase_in_eigenbasis(rho: np.ndarray, op: np.ndarray, degeneracy_tol: float = 1e-9) -> np.ndarray:
    """Project rho onto the block-diagonal algebra of a Hermitian operator.

    Keeps only matrix elements between eigenvectors of `op` with equal
    eigenvalue (to within `degeneracy_tol`); this is the limit of repeated
    projective measurement of `op`.
    """
    evals, evecs = np.linalg.eigh(op)
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    used = np.zeros(len(evals), dtype=bool)
    for i, ev in enumerate(evals):
        if used[i]:
            continue
        members = np.abs(evals - ev) <= degeneracy_tol
        used |= members
        basis = evecs[:, members]
        proj = basis @ basis.conj().T
        out += proj @ rho @ proj
    return out


def channel_project_matrix(rho: np.ndarray) -> np.ndarray:
    """Apply the two dephasing maps that reduce rho to the channel family."""
    step1 = dephase_in_eigenbasis(rho, SIGMA_DIFF_Z)
    return dephase_in_eigenbasis(step1, SIGMA_XX)


def project_to_channel(rho: np.ndarray) -> ChannelState:
    """Dephase a two-qubit state onto the channel family and read off its parameters.

    The projected matrix has the channel form exactly; lambda1 comes from the
    diagonal and lambda2 (signed) from the surviving corner element. The
    usable entropy of the result never exceeds that of the input state.
    """
    projected = channel_project_matrix(rho)
    l1 = float(4.0 * projected[0, 0].real - 1.0)
    l2 = float(2.0 * projected[0, 3].real)
    # guard against tiny numerical overshoot of the positivity boundary
    l1 = min(max(l1, -1.0), 1.0)
    cap = (1.0 + l1) / 2.0
    l2 = min(max(l2, -cap), cap)
    return ChannelState(l1, l2)


def random_density(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the Ginibre ensemble (full rank by default)."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
