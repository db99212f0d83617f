"""Measurement statistics and the Devetak-Winter secret-key rate.

Eve's Holevo information is evaluated on the AB system alone, assuming she
holds a purification of ``rho_AB``:

    chi(A:E) = S(rho_AB) - sum_a p_A(a) S(rho_B^a)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ZeroProbabilityError
from .quantum import (
    PAULI_X,
    PAULI_Z,
    BellDiagonalState,
    MeasurementBasis,
    bloch_basis,
    shannon_entropy,
    von_neumann_entropy,
    werner_entropy,
)

ZERO_PROB = 1e-12


@dataclass(frozen=True)
class JointDistribution:
    """``p[a, b]``: probability of outcome ``a`` at Alice and ``b`` at Bob."""

    p: np.ndarray

    @property
    def p_A(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def p_B(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def H_A(self) -> float:
        return shannon_entropy(self.p_A)

    def H_B(self) -> float:
        return shannon_entropy(self.p_B)

    def H_AB(self) -> float:
        return shannon_entropy(self.p)


@dataclass(frozen=True)
class KeyRateReport:
    mutual_information: float
    holevo: float
    rate: float
    conditional_entropy_term: float


def _product_vectors(bA: MeasurementBasis, bB: MeasurementBasis) -> np.ndarray:
    # row 2*a + b holds |a> (x) |b>
    return np.array([np.kron(a, b) for a in bA.vectors for b in bB.vectors])


def joint_distribution(rho: np.ndarray, bA: MeasurementBasis, bB: MeasurementBasis) -> JointDistribution:
    v = _product_vectors(bA, bB)
    p = np.real(np.einsum("ki,ij,kj->k", v.conj(), np.asarray(rho), v)).reshape(2, 2)
    # roundoff can push exact zeros slightly negative
    p = np.where(np.abs(p) < 1e-15, 0.0, p)
    return JointDistribution(p)


def conditional_state_B(rho: np.ndarray, bA: MeasurementBasis, outcome: int) -> np.ndarray:
    """Bob's state after Alice obtains ``outcome`` in ``bA``."""
    a = bA.vectors[outcome]
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    unnormalized = np.einsum("i,ijkl,k->jl", a.conj(), r, a)
    p = float(np.real(np.trace(unnormalized)))
    if p <= ZERO_PROB:
        raise ZeroProbabilityError(f"outcome {outcome} has probability {p:.3g}")
    return unnormalized / p


def mutual_information(d: JointDistribution) -> float:
    return d.H_A() + d.H_B() - d.H_AB()


def _conditional_entropy_term(rho: np.ndarray, bA: MeasurementBasis) -> float:
    total = 0.0
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    for a in bA.vectors:
        unnormalized = np.einsum("i,ijkl,k->jl", a.conj(), r, a)
        p = float(np.real(np.trace(unnormalized)))
        if p <= ZERO_PROB:
            continue  # weighted by p_A(a) = 0
        total += p * von_neumann_entropy(unnormalized / p)
    return total


def holevo_AB(rho: np.ndarray, bA: MeasurementBasis) -> float:
    return von_neumann_entropy(rho) - _conditional_entropy_term(rho, bA)


def devetak_winter_rate(rho: np.ndarray, bA: MeasurementBasis, bB: MeasurementBasis) -> KeyRateReport:
    """One-way secret-key rate ``I(A:B) - chi(A:E)``; may be negative."""
    mi = mutual_information(joint_distribution(rho, bA, bB))
    cond = _conditional_entropy_term(rho, bA)
    chi = von_neumann_entropy(rho) - cond
    return KeyRateReport(mutual_information=mi, holevo=chi, rate=mi - chi, conditional_entropy_term=cond)


def key_rate(rho: np.ndarray, bA: MeasurementBasis, bB: MeasurementBasis) -> float:
    return devetak_winter_rate(rho, bA, bB).rate


def reduced_rate_bell_diagonal(rho: np.ndarray, bA: MeasurementBasis, bB: MeasurementBasis) -> float:
    """``2 - H(A,B) - S(rho) + S(rho_B^alpha)``, valid for Bell-diagonal ``rho`` only."""
    h_ab = joint_distribution(rho, bA, bB).H_AB()
    return 2 - h_ab - von_neumann_entropy(rho) + von_neumann_entropy(conditional_state_B(rho, bA, 0))


def optimal_rate_werner(F: float) -> float:
    """Capacity ``1 - S(rho)`` of the Werner state with fidelity ``F``."""
    if not (0.25 <= F <= 1):
        raise DomainError(f"Werner fidelity must lie in [0.25, 1], got {F!r}")
    return 1 - werner_entropy(F)


def threshold_fidelity(xtol: float = 1e-14) -> float:
    """Smallest Werner fidelity with a positive optimal key rate (about 0.8107)."""
    return brentq(optimal_rate_werner, 0.5, 0.99, xtol=xtol)


def rate_bell_diagonal_computational(s: BellDiagonalState) -> float:
    """Rate of a Bell-diagonal state when both parties measure in Z: ``1 - S(rho)``."""
    return 1 - shannon_entropy(s.coefficients)


def werner_joint_probability(F: float, a: np.ndarray, b: np.ndarray) -> float:
    """``(1-w)/2 |<b|a*>|^2 + w/4`` for Werner states; ``a``, ``b`` are kets."""
    w = 4 * (1 - F) / 3
    return (1 - w) / 2 * abs(np.vdot(b, a.conj())) ** 2 + w / 4


# ---------------------------------------------------------------------------
# Brute-force basis search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    rate: float
    bA: MeasurementBasis
    bB: MeasurementBasis
    angles: tuple[float, float, float, float]


def _grid_bases(steps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    thetas = np.linspace(0.0, np.pi, steps)
    phis = 2 * np.pi * np.arange(steps) / steps
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    th, ph = th.ravel(), ph.ravel()
    c, s, e = np.cos(th / 2), np.sin(th / 2), np.exp(1j * ph)
    # vecs[n, outcome, component]
    vecs = np.stack([np.stack([c, e * s], -1), np.stack([s, -e * c], -1)], axis=1)
    return vecs, th, ph


def _xlogx_sum(p: np.ndarray, axis) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -t.sum(axis=axis)


def basis_grid_oracle(rho: np.ndarray, grid_steps: int) -> OracleResult:
    """Maximize the key rate over a uniform grid of basis pairs.

    Each party's basis is ``bloch_basis(theta, phi)`` with ``theta`` on
    ``grid_steps`` points of ``[0, pi]`` and ``phi`` on ``grid_steps`` points
    of ``[0, 2 pi)``. Ties go to the lexicographically first
    ``(theta_A, phi_A, theta_B, phi_B)``.
    """
    if grid_steps < 8:
        raise DomainError("grid_steps must be at least 8")
    rho = np.asarray(rho, dtype=complex)
    vecs, th, ph = _grid_bases(grid_steps)
    r = rho.reshape(2, 2, 2, 2)

    # Alice-only terms: outcome probabilities and conditional entropies
    unnorm = np.einsum("noi,ijkl,nok->nojl", vecs.conj(), r, vecs)
    pA = np.real(np.einsum("nojj->no", unnorm))
    safe = np.where(pA > ZERO_PROB, pA, 1.0)
    lam = np.clip(np.linalg.eigvalsh(unnorm / safe[..., None, None]), 0, None)
    cond = np.sum(np.where(pA > ZERO_PROB, pA * _xlogx_sum(lam, axis=-1), 0.0), axis=1)

    # p[nA, nB, a, b] = <b| unnorm[nA, a] |b>
    p = np.real(np.einsum("mbj,najl,mbl->nmab", vecs.conj(), unnorm, vecs))
    p = np.clip(p, 0, None)
    H_A = _xlogx_sum(pA, axis=1)[:, None]
    H_B = _xlogx_sum(p.sum(axis=2), axis=2)
    H_AB = _xlogx_sum(p.reshape(*p.shape[:2], 4), axis=2)
    rates = H_A + H_B - H_AB - von_neumann_entropy(rho) + cond[:, None]

    nA, nB = np.unravel_index(int(np.argmax(rates)), rates.shape)
    bA = bloch_basis(th[nA], ph[nA])
    bB = bloch_basis(th[nB], ph[nB])
    return OracleResult(float(rates[nA, nB]), bA, bB, (th[nA], ph[nA], th[nB], ph[nB]))


# ---------------------------------------------------------------------------
# CHSH
# ---------------------------------------------------------------------------

CHSH_A = (PAULI_Z, PAULI_X)
CHSH_B = ((PAULI_Z - PAULI_X) / np.sqrt(2), (PAULI_Z + PAULI_X) / np.sqrt(2))
# sign pattern for <A_i B_j>; the minus sits on (A2, B1) for B1 = (Z - X)/sqrt2
CHSH_SIGNS = ((1, 1), (-1, 1))


def chsh_value(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    total = 0.0
    for i, a in enumerate(CHSH_A):
        for j, b in enumerate(CHSH_B):
            total += CHSH_SIGNS[i][j] * np.real(np.trace(rho @ np.kron(a, b)))
    return float(total)

