"""Measurement-basis schedules and processing rates.

Alice picks basis ``i`` and Bob basis ``j`` (1-based) independently. The four
CHSH combinations ``i, j in {1, 2}`` each occur with probability ``eta``;
every other combination may contribute key. Tables are indexed
``[i - 1, j - 1]`` with Alice first.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .keyrate import key_rate, optimal_rate_werner
from .quantum import (
    COMPUTATIONAL_BASIS,
    MeasurementBasis,
    bloch_basis,
    werner_from_fidelity,
)

TIE_TOL = 1e-12

# Eigenbases of A1 = Z, A2 = X, B1 = (Z - X)/sqrt2, B2 = (Z + X)/sqrt2.
BASIS_A1 = MeasurementBasis(COMPUTATIONAL_BASIS.first, COMPUTATIONAL_BASIS.second, "A1")
BASIS_A2 = bloch_basis(np.pi / 2, 0.0, "A2")
BASIS_B1 = bloch_basis(np.pi / 4, np.pi, "B1")
BASIS_B2 = bloch_basis(np.pi / 4, 0.0, "B2")
CHSH_BASES = {"A1": BASIS_A1, "A2": BASIS_A2, "B1": BASIS_B1, "B2": BASIS_B2}

S_MEAS = tuple((i, j) for i in (1, 2, 3) for j in (1, 2, 3))
S_CHSH = tuple((i, j) for i in (1, 2) for j in (1, 2))
S_PROC = tuple(c for c in S_MEAS if c not in S_CHSH)


def _check_eta(eta: float) -> None:
    if not 0 < eta < 0.25:
        raise DomainError(f"eta must lie in (0, 0.25), got {eta!r}")


def _check_gamma(eta: float, gamma: float) -> None:
    if not 2 * eta - 1e-15 <= gamma <= 0.5:
        raise DomainError(f"gamma must lie in [2*eta, 0.5] = [{2 * eta:.6g}, 0.5], got {gamma!r}")


def basis_marginals(eta: float, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-party basis choice probabilities ``(P_A, P_B)``."""
    _check_eta(eta)
    _check_gamma(eta, gamma)
    pa = eta / gamma
    return np.array([pa, pa, 1 - 2 * pa]), np.array([gamma, gamma, 1 - 2 * gamma])


def probability_table(eta: float, gamma: float) -> np.ndarray:
    """Joint basis-choice probabilities, entered cell by cell."""
    _check_eta(eta)
    _check_gamma(eta, gamma)
    g = gamma
    a3_b12 = g - 2 * eta
    a12_b3 = eta / g - 2 * eta
    corner = (2 * g - 1) * (2 * eta - g) / g
    return np.array(
        [
            [eta, eta, a12_b3],
            [eta, eta, a12_b3],
            [a3_b12, a3_b12, corner],
        ]
    )


@dataclass(frozen=True)
class BasisSchedule:
    eta: float
    gamma: float
    bA3: MeasurementBasis
    bB3: MeasurementBasis

    def __post_init__(self) -> None:
        _check_eta(self.eta)
        _check_gamma(self.eta, self.gamma)

    @property
    def table(self) -> np.ndarray:
        return probability_table(self.eta, self.gamma)

    def alice_bases(self) -> tuple[MeasurementBasis, ...]:
        return (BASIS_A1, BASIS_A2, self.bA3)

    def bob_bases(self) -> tuple[MeasurementBasis, ...]:
        return (BASIS_B1, BASIS_B2, self.bB3)

    def with_eta(self, eta: float) -> "BasisSchedule":
        return BasisSchedule(eta, self.gamma, self.bA3, self.bB3)


def asymmetric_schedule(eta: float, gamma: float | None = None) -> BasisSchedule:
    """``B_A3 = B_B1`` and ``B_B3 = B_A1``; ``gamma`` defaults to the optimum ``2 eta``."""
    return BasisSchedule(eta, 2 * eta if gamma is None else gamma, BASIS_B1, BASIS_A1)


def symmetric_schedule(eta: float, shared_basis: MeasurementBasis) -> BasisSchedule:
    _require_chsh_basis(shared_basis)
    return BasisSchedule(eta, float(np.sqrt(eta)), shared_basis, shared_basis)


def _require_chsh_basis(b: MeasurementBasis) -> None:
    if not any(b.same_basis(c) for c in CHSH_BASES.values()):
        raise DomainError("shared basis must be one of the CHSH bases A1, A2, B1, B2")


@dataclass(frozen=True)
class CellRate:
    probability: float
    rate: float  # clamped at zero
    contribution: float


@dataclass(frozen=True)
class RateBreakdown:
    cells: dict[tuple[int, int], CellRate]
    total: float
    eta: float
    gamma: float
    fidelity: float | None = None


def cell_key_rates(rho: np.ndarray, bA3: MeasurementBasis, bB3: MeasurementBasis) -> dict[tuple[int, int], float]:
    """Key rate clamped at zero for every key-generating basis combination."""
    alice = (BASIS_A1, BASIS_A2, bA3)
    bob = (BASIS_B1, BASIS_B2, bB3)
    return {(i, j): max(0.0, key_rate(rho, alice[i - 1], bob[j - 1])) for i, j in S_PROC}


def processing_rate(rho: np.ndarray, schedule: BasisSchedule, fidelity: float | None = None) -> RateBreakdown:
    rates = cell_key_rates(rho, schedule.bA3, schedule.bB3)
    table = schedule.table
    cells = {}
    for (i, j), r in rates.items():
        p = float(table[i - 1, j - 1])
        cells[(i, j)] = CellRate(p, r, p * r)
    total = float(sum(c.contribution for c in cells.values()))
    return RateBreakdown(cells, total, schedule.eta, schedule.gamma, fidelity)


def asymmetric_optimal_rate(F: float, eta: float) -> float:
    _check_eta(eta)
    return (0.5 - 2 * eta) * max(0.0, optimal_rate_werner(F))


def symmetric_rate(F: float, eta: float, shared_basis: MeasurementBasis) -> float:
    """Processing rate with ``B_A3 = B_B3 = shared_basis`` and ``gamma = sqrt(eta)``."""
    schedule = symmetric_schedule(eta, shared_basis)
    return processing_rate(werner_from_fidelity(F), schedule, F).total


def best_symmetric_rate(F: float, eta: float) -> tuple[float, str]:
    """Best symmetric rate over the four admissible shared bases, and its label."""
    best = max(((symmetric_rate(F, eta, b), name) for name, b in CHSH_BASES.items()), key=lambda t: t[0])
    return best


def symmetric_rate_closed_form(F: float, eta: float) -> float:
    """Sift-weighted closed form: optimal cells plus cross-party CHSH cells."""
    _check_eta(eta)
    s = np.sqrt(eta)
    return (1 - 3 * s + 2 * eta) * max(0.0, optimal_rate_werner(F)) + (2 * s - 4 * eta) * max(
        0.0, suboptimal_pair_rate(F, 1, 1)
    )


def suboptimal_pair_rate(F: float, i: int, j: int) -> float:
    """Alice in ``B_Ai``, Bob in ``B_Bj`` (bases of different parties)."""
    alice = (BASIS_A1, BASIS_A2)[i - 1]
    bob = (BASIS_B1, BASIS_B2)[j - 1]
    return key_rate(werner_from_fidelity(F), alice, bob)


def wasted_pair_rate(F: float, i: int, j: int, side: Literal["A", "B"]) -> float:
    """Both parties in distinct CHSH bases of the same party; never positive."""
    if i == j:
        raise DomainError("wasted pairs need distinct bases i != j")
    pool = (BASIS_A1, BASIS_A2) if side == "A" else (BASIS_B1, BASIS_B2)
    return key_rate(werner_from_fidelity(F), pool[i - 1], pool[j - 1])


@lru_cache(maxsize=None)
def boundary_fidelity() -> float:
    """Fidelity above which cross-party CHSH pairs give a positive key rate (about 0.895)."""
    return brentq(lambda F: suboptimal_pair_rate(F, 1, 1), 0.82, 0.999, xtol=1e-13)


# ---------------------------------------------------------------------------
# Strategy selection
# ---------------------------------------------------------------------------


class StrategyTag(enum.Enum):
    ASYMMETRIC = "asym"
    SYMMETRIC = "sym"
    CUSTOM = "custom"


@dataclass(frozen=True)
class StrategyKind:
    tag: StrategyTag
    schedule: BasisSchedule | None = field(default=None)

    def __post_init__(self) -> None:
        if (self.tag is StrategyTag.CUSTOM) != (self.schedule is not None):
            raise DomainError("a schedule is required for, and only for, custom strategies")

    @classmethod
    def parse(cls, name: str) -> "StrategyKind":
        if name in ("asym", "asymmetric"):
            return ASYMMETRIC
        if name in ("sym", "symmetric"):
            return SYMMETRIC
        raise DomainError(f"unknown strategy {name!r}; expected asym or sym")

    def rate(self, F: float, eta: float) -> float:
        """Processing rate of a Werner state with fidelity ``F`` at CHSH probability ``eta``."""
        if self.tag is StrategyTag.ASYMMETRIC:
            return asymmetric_optimal_rate(F, eta)
        if self.tag is StrategyTag.SYMMETRIC:
            _check_eta(eta)
            return symmetric_rate_closed_form(F, eta)
        assert self.schedule is not None
        return processing_rate(werner_from_fidelity(F), self.schedule.with_eta(eta), F).total


ASYMMETRIC = StrategyKind(StrategyTag.ASYMMETRIC)
SYMMETRIC = StrategyKind(StrategyTag.SYMMETRIC)


# ---------------------------------------------------------------------------
# Region map
# ---------------------------------------------------------------------------


class Region(enum.Enum):
    ASYM = "asym"
    SYM = "sym"
    TIE = "tie"
    NOKEY = "nokey"


def classify(asym: float, sym: float) -> Region:
    if asym <= 0 and sym <= 0:
        return Region.NOKEY
    if abs(asym - sym) <= TIE_TOL:
        return Region.TIE
    return Region.ASYM if asym > sym else Region.SYM


def axis(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise DomainError("steps must be positive")
    if steps == 1:
        return np.array([lo], dtype=float)
    return np.linspace(lo, hi, steps)


@dataclass(frozen=True)
class RegionMap:
    etas: np.ndarray
    fidelities: np.ndarray
    asym: np.ndarray  # [eta index, F index]
    sym: np.ndarray
    labels: np.ndarray  # of Region

    def rows(self) -> Iterable[tuple[float, float, float, float, str]]:
        for a, eta in enumerate(self.etas):
            for b, F in enumerate(self.fidelities):
                yield float(eta), float(F), float(self.asym[a, b]), float(self.sym[a, b]), self.labels[a, b].value

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eta", "F", "asym_rate", "sym_rate", "label"])
        for eta, F, ra, rs, lab in self.rows():
            w.writerow([fmt(eta), fmt(F), fmt(ra), fmt(rs), lab])
        return buf.getvalue()


def fmt(x: float) -> str:
    """12 significant digits, normalized negative zero."""
    return f"{x + 0.0:.12g}"


def _symmetric_cells(F: float) -> list[dict[tuple[int, int], float]]:
    rho = werner_from_fidelity(F)
    return [cell_key_rates(rho, b, b) for b in CHSH_BASES.values()]


def region_map(
    eta_range: Sequence[float], F_range: Sequence[float], steps: int | tuple[int, int]
) -> RegionMap:
    """Label each ``(eta, F)`` grid point by the better processing strategy.

    ``steps`` is the point count per axis, or ``(eta_steps, F_steps)``.
    """
    n_eta, n_F = (steps, steps) if isinstance(steps, int) else steps
    etas = axis(eta_range[0], eta_range[1], n_eta)
    Fs = axis(F_range[0], F_range[1], n_F)
    for eta in etas:
        _check_eta(float(eta))
    tables = [probability_table(float(e), float(np.sqrt(e))) for e in etas]

    asym = np.empty((len(etas), len(Fs)))
    sym = np.empty_like(asym)
    for b, F in enumerate(Fs):
        r_opt = max(0.0, optimal_rate_werner(float(F)))
        per_basis = _symmetric_cells(float(F))
        for a, eta in enumerate(etas):
            asym[a, b] = (0.5 - 2 * eta) * r_opt
            sym[a, b] = max(
                sum(tables[a][i - 1, j - 1] * cells[(i, j)] for i, j in S_PROC) for cells in per_basis
            )
    labels = np.empty(asym.shape, dtype=object)
    for idx in np.ndindex(asym.shape):
        labels[idx] = classify(asym[idx], sym[idx])
    return RegionMap(etas, Fs, asym, sym, labels)
