"""Recurrence entanglement distillation on Bell-diagonal pairs.

One step takes two identical copies of a Bell-diagonal state and runs the
exact two-pair circuit on the 16-dimensional joint state: optional local
rotations (DEJMPS), bilateral CNOT from the source pair onto the target pair,
Z measurement of both target qubits, and post-selection on coinciding
outcomes. Qubit order in the joint state is (A1, B1, A2, B2) where pair 1 is
the source and pair 2 the target.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonBellDiagonalError
from .quantum import BellDiagonalState, bell_diagonal_to_operator, in_bell_basis

MAX_ITERATIONS = 64
BELL_DIAGONAL_TOL = 1e-10


class Protocol(enum.Enum):
    BBPSSW = "bbpssw"
    DEJMPS = "dejmps"


@dataclass(frozen=True)
class ProtocolKind:
    tag: Protocol
    twirl_after_step: bool = False

    @classmethod
    def parse(cls, name: str, twirl_after_step: bool = False) -> "ProtocolKind":
        try:
            return cls(Protocol(name.lower()), twirl_after_step)
        except ValueError:
            raise DomainError(f"unknown protocol {name!r}; expected one of bbpssw, dejmps") from None

    @property
    def twirls(self) -> bool:
        return self.twirl_after_step or self.tag is Protocol.BBPSSW


BBPSSW = ProtocolKind(Protocol.BBPSSW)
DEJMPS = ProtocolKind(Protocol.DEJMPS)


@dataclass(frozen=True)
class DistillationStep:
    output: BellDiagonalState
    success_probability: float


@dataclass(frozen=True)
class DistillationTrajectory:
    states: tuple[BellDiagonalState, ...]
    success_probabilities: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.success_probabilities)

    @property
    def fidelities(self) -> list[float]:
        return [s.F for s in self.states]


def _rx(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _cnot(control: int, target: int, n: int = 4) -> np.ndarray:
    dim = 2**n
    perm = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        perm[j, i] = 1
    return perm


@lru_cache(maxsize=None)
def _circuit(tag: Protocol) -> np.ndarray:
    u = _cnot(1, 3) @ _cnot(0, 2)
    if tag is Protocol.DEJMPS:
        alice, bob = _rx(np.pi / 2), _rx(-np.pi / 2)
        local = np.kron(np.kron(alice, bob), np.kron(alice, bob))
        u = u @ local
    u = np.asarray(u, dtype=complex)
    u.setflags(write=False)
    return u


def two_pair_outcomes(state: BellDiagonalState, protocol: ProtocolKind) -> dict[tuple[int, int], tuple[float, np.ndarray]]:
    """Probability and unnormalized source-pair state for every target outcome ``(m_A, m_B)``."""
    rho = bell_diagonal_to_operator(state)
    u = _circuit(protocol.tag)
    joint = u @ np.kron(rho, rho) @ u.conj().T
    r = joint.reshape(4, 4, 4, 4)  # (source, target, source', target')
    out = {}
    for mA in (0, 1):
        for mB in (0, 1):
            t = 2 * mA + mB
            block = r[:, t, :, t]
            out[(mA, mB)] = (float(np.real(np.trace(block))), block)
    return out


def distill_step(state: BellDiagonalState, protocol: ProtocolKind) -> DistillationStep:
    outcomes = two_pair_outcomes(state, protocol)
    kept = outcomes[(0, 0)][1] + outcomes[(1, 1)][1]
    p = outcomes[(0, 0)][0] + outcomes[(1, 1)][0]
    if p <= 0:
        raise DomainError("post-selection has zero success probability")
    m = in_bell_basis(kept / p)
    residual = np.abs(m - np.diag(np.diag(m))).max()
    if residual > BELL_DIAGONAL_TOL:
        raise NonBellDiagonalError(f"off-Bell-diagonal residual {residual:.3g}")
    c = np.clip(np.real(np.diag(m)), 0.0, None)
    c = c / c.sum()
    if protocol.twirls:
        q = (1 - c[0]) / 3
        c = np.array([c[0], q, q, q])
    return DistillationStep(BellDiagonalState.from_coefficients(c), min(max(p, 0.0), 1.0))


def trajectory(initial_F: float, k: int, protocol: ProtocolKind) -> DistillationTrajectory:
    """Werner state of ``initial_F`` followed by ``k`` distillation steps."""
    if not 0 <= k <= MAX_ITERATIONS:
        raise DomainError(f"k must lie in [0, {MAX_ITERATIONS}], got {k}")
    states = [BellDiagonalState.werner(initial_F)]
    probs = []
    for _ in range(k):
        step = distill_step(states[-1], protocol)
        states.append(step.output)
        probs.append(step.success_probability)
    return DistillationTrajectory(tuple(states), tuple(probs))


def ent_rate(t: DistillationTrajectory) -> float:
    """Surviving pairs per initial pair: product of ``p_ent / 2`` over the steps."""
    return cumulative_ent_rates(t)[-1]


def cumulative_ent_rates(t: DistillationTrajectory) -> list[float]:
    rates = [1.0]
    for p in t.success_probabilities:
        rates.append(rates[-1] * p / 2)
    return rates


# Published closed-form recursions, used only to cross-check the circuit.

def bbpssw_werner_recursion(F: float) -> tuple[float, float]:
    """Output fidelity and success probability of BBPSSW on Werner inputs."""
    q = (1 - F) / 3
    p = F**2 + 2 * F * q + 5 * q**2
    return (F**2 + q**2) / p, p


def dejmps_recursion(c: tuple[float, float, float, float]) -> tuple[tuple[float, float, float, float], float]:
    """DEJMPS map on weights of (Phi+, Psi-, Psi+, Phi-)."""
    A, B, C, D = c
    n = (A + B) ** 2 + (C + D) ** 2
    return ((A * A + B * B) / n, 2 * C * D / n, (C * C + D * D) / n, 2 * A * B / n), n
