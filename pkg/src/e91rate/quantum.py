"""Two-qubit density-operator algebra.

Density operators are plain ``numpy`` arrays (2x2 or 4x4, complex). The
computational basis index of a two-qubit state is ``2*q_A + q_B``, i.e.
Alice holds the most significant bit. All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import (
    DomainError,
    InvalidCoefficientsError,
    PSDViolationError,
)

ATOL = 1e-12
PSD_TOL = 1e-10

_S = 1.0 / np.sqrt(2.0)

# Rows: |Phi+>, |Psi->, |Psi+>, |Phi->. This is also the order of the
# Bell-diagonal weights (F, delta, epsilon, tau).
BELL_VECTORS = np.array(
    [
        [_S, 0, 0, _S],
        [0, _S, -_S, 0],
        [0, _S, _S, 0],
        [_S, 0, 0, -_S],
    ],
    dtype=complex,
)
BELL_VECTORS.setflags(write=False)
PHI_PLUS = BELL_VECTORS[0]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def maximally_mixed(dim: int) -> np.ndarray:
    """Return ``I_dim / dim``."""
    return np.eye(dim, dtype=complex) / dim


def check_density(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density operator must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise DomainError("density operator is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise DomainError(f"density operator has trace {tr.real:.3g}, expected 1")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -PSD_TOL:
        raise PSDViolationError(f"eigenvalue {lam.min():.3g} below -{PSD_TOL:g}")
    return rho


# ---------------------------------------------------------------------------
# Single-qubit bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal pair of qubit state vectors ``{first, second}``.

    Outcome 0 refers to ``first`` and outcome 1 to ``second``. Rates never
    depend on that ordering, nor on global phases of the vectors.
    """

    first: np.ndarray
    second: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        a = _frozen(self.first).reshape(2)
        b = _frozen(self.second).reshape(2)
        for v in (a, b):
            if abs(np.vdot(v, v).real - 1) > ATOL:
                raise DomainError("basis vectors must be normalized")
        if abs(np.vdot(a, b)) >= ATOL:
            raise DomainError("basis vectors are not orthogonal")
        object.__setattr__(self, "first", a)
        object.__setattr__(self, "second", b)

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.first, self.second)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.outer(v, v.conj()) for v in self.vectors)  # type: ignore[return-value]

    def same_basis(self, other: "MeasurementBasis", atol: float = 1e-10) -> bool:
        """True if both bases contain the same rays, in either order."""
        p, q = self.projectors(), other.projectors()
        return any(
            np.allclose(p[0], q[i], atol=atol) and np.allclose(p[1], q[1 - i], atol=atol)
            for i in (0, 1)
        )

    def __repr__(self) -> str:
        name = f" {self.label!r}" if self.label else ""
        return f"MeasurementBasis{name}({np.round(self.first, 6)}, {np.round(self.second, 6)})"


def bloch_basis(theta: float, phi: float, label: str = "") -> MeasurementBasis:
    """Basis whose first vector points along the Bloch direction ``(theta, phi)``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    ph = np.exp(1j * phi)
    return MeasurementBasis(np.array([c, ph * s]), np.array([s, -ph * c]), label)


def conjugate_basis(b: MeasurementBasis) -> MeasurementBasis:
    """Entrywise complex conjugate of both basis vectors."""
    return MeasurementBasis(b.first.conj(), b.second.conj(), b.label + "*" if b.label else "")


def eigenbasis(observable: np.ndarray, label: str = "") -> MeasurementBasis:
    """Eigenbasis of a qubit observable, ordered by descending eigenvalue."""
    w, v = np.linalg.eigh(np.asarray(observable, dtype=complex))
    order = np.argsort(w)[::-1]
    return MeasurementBasis(v[:, order[0]], v[:, order[1]], label)


COMPUTATIONAL_BASIS = MeasurementBasis(np.array([1, 0]), np.array([0, 1]), "Z")


# ---------------------------------------------------------------------------
# Bell-diagonal and Werner states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BellDiagonalState:
    """Weights of |Phi+>, |Psi->, |Psi+>, |Phi->, in that order."""

    F: float
    delta: float
    epsilon: float
    tau: float

    def __post_init__(self) -> None:
        c = self.coefficients
        if min(c) < -ATOL:
            raise InvalidCoefficientsError(f"negative Bell weight in {c}")
        if abs(sum(c) - 1) > ATOL:
            raise InvalidCoefficientsError(f"Bell weights sum to {sum(c)!r}, expected 1")

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.F, self.delta, self.epsilon, self.tau)

    @classmethod
    def from_coefficients(cls, c: Sequence[float]) -> "BellDiagonalState":
        F, d, e, t = (float(x) for x in c)
        return cls(F, d, e, t)

    @classmethod
    def werner(cls, F: float) -> "BellDiagonalState":
        _check_werner_fidelity(F)
        q = (1 - F) / 3
        return cls(F, q, q, q)

    def is_werner(self, atol: float = 1e-10) -> bool:
        return max(self.delta, self.epsilon, self.tau) - min(self.delta, self.epsilon, self.tau) <= atol

    def operator(self) -> np.ndarray:
        return bell_diagonal_to_operator(self)


@dataclass(frozen=True)
class WernerState:
    fidelity: float

    def __post_init__(self) -> None:
        _check_werner_fidelity(self.fidelity)

    @property
    def werner_parameter(self) -> float:
        """Weight ``w = 4(1 - F)/3`` of the white-noise component."""
        return 4 * (1 - self.fidelity) / 3

    def operator(self) -> np.ndarray:
        return werner_from_fidelity(self.fidelity)

    def bell_diagonal(self) -> BellDiagonalState:
        return BellDiagonalState.werner(self.fidelity)


def _check_werner_fidelity(F: float) -> None:
    if not (0.25 - ATOL <= F <= 1 + ATOL):
        raise DomainError(f"Werner fidelity must lie in [0.25, 1], got {F!r}")


def bell_phi_plus() -> np.ndarray:
    return np.outer(PHI_PLUS, PHI_PLUS.conj())


def werner_from_fidelity(F: float) -> np.ndarray:
    _check_werner_fidelity(F)
    return (4 * F - 1) / 3 * bell_phi_plus() + (1 - F) / 3 * np.eye(4, dtype=complex)


def bell_diagonal_to_operator(s: BellDiagonalState) -> np.ndarray:
    c = np.asarray(s.coefficients, dtype=float)
    return np.einsum("k,ki,kj->ij", c, BELL_VECTORS, BELL_VECTORS.conj())


def in_bell_basis(rho: np.ndarray) -> np.ndarray:
    """Matrix elements ``<B_i|rho|B_j>`` in the ordered Bell basis."""
    return BELL_VECTORS.conj() @ np.asarray(rho) @ BELL_VECTORS.T


def fidelity(rho: np.ndarray) -> float:
    """Overlap ``<Phi+|rho|Phi+>``."""
    return float(np.real(PHI_PLUS.conj() @ np.asarray(rho) @ PHI_PLUS))


def werner_twirl(rho: np.ndarray) -> WernerState:
    """Project onto the Werner family, keeping the fidelity."""
    F = fidelity(rho)
    if F < 0.25 - ATOL:
        raise DomainError(f"fidelity {F:.6g} < 1/4: twirled state would not be PSD")
    return WernerState(min(max(F, 0.25), 1.0))


# ---------------------------------------------------------------------------
# Traces and entropies
# ---------------------------------------------------------------------------


def partial_trace(rho: np.ndarray, subsystem: Literal["A", "B"]) -> np.ndarray:
    """Trace out ``subsystem`` of a two-qubit operator."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)  # (a, b, a', b')
    if subsystem == "A":
        return np.einsum("ajak->jk", r)
    if subsystem == "B":
        return np.einsum("ajbj->ab", r)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def _entropy_of_weights(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def shannon_entropy(p: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in bits, with ``0 ld 0 = 0``."""
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < 0):
        raise DomainError("probabilities must be non-negative")
    if abs(p.sum() - 1) > 1e-9:
        raise DomainError(f"probabilities sum to {p.sum()!r}, expected 1")
    return _entropy_of_weights(p)


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1 - p])


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density operator with tiny negatives clamped to zero."""
    lam = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    if lam.min() < -PSD_TOL:
        raise PSDViolationError(f"eigenvalue {lam.min():.3g} below -{PSD_TOL:g}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    return _entropy_of_weights(spectrum(rho))


def werner_entropy(F: float) -> float:
    """Closed-form entropy of the Werner state with fidelity ``F``."""
    _check_werner_fidelity(F)
    q = (1 - F) / 3
    return _entropy_of_weights(np.array([F, q, q, q]))
