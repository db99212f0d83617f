"""Optimal number of distillation rounds.

The total rate after ``k`` rounds is ``r(k) = r_ent(k) * r_proc(k)``, where
``r_proc`` is evaluated on the Werner-twirled state of round ``k``. The
search first locates the first strict descent ``k_loc`` of ``r`` and then
inspects a window of at most ``kappa`` further rounds; beyond the window no
``k`` can beat ``r(k_loc)``.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

from .distillation import MAX_ITERATIONS, ProtocolKind, distill_step, trajectory, ent_rate
from .errors import DegenerateCurveError, DomainError
from .quantum import BellDiagonalState
from .strategy import StrategyKind, fmt

DEFAULT_K_MAX = 30


class EtaTag(enum.Enum):
    FIXED = "fixed"
    SCALED = "scaled"


@dataclass(frozen=True)
class EtaMode:
    """``Fixed``: eta(k) = eta0. ``Scaled``: eta(k) = eta0 / r_ent(k)."""

    tag: EtaTag
    eta0: float

    def __post_init__(self) -> None:
        if not 0 < self.eta0 < 0.25:
            raise DomainError(f"eta0 must lie in (0, 0.25), got {self.eta0!r}")

    @classmethod
    def fixed(cls, eta0: float) -> "EtaMode":
        return cls(EtaTag.FIXED, eta0)

    @classmethod
    def scaled(cls, eta0: float) -> "EtaMode":
        return cls(EtaTag.SCALED, eta0)

    def eta(self, r_ent: float) -> float:
        if self.tag is EtaTag.FIXED:
            return self.eta0
        return self.eta0 / r_ent if r_ent > 0 else float("inf")


@dataclass(frozen=True)
class CurvePoint:
    k: int
    r_ent: float
    r_proc: float
    r: float
    eta: float
    fidelity: float


def _processing(F: float, strategy: StrategyKind, eta: float) -> float:
    if not 0 < eta < 0.25:
        raise DomainError(f"eta(k) = {eta:.6g} left (0, 0.25)")
    return strategy.rate(F, eta)


def total_rate(
    k: int, F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode
) -> float:
    """``r_ent(k) * r_proc(k)``; raises :class:`DomainError` if eta(k) is out of range."""
    t = trajectory(F0, k, protocol)
    r_ent = ent_rate(t)
    return r_ent * _processing(t.states[-1].F, strategy, eta_mode.eta(r_ent))


class RateCurve:
    """Lazily extended ``r(k)`` along one distillation trajectory.

    Rounds whose eta(k) leaves (0, 0.25), or whose custom schedule becomes
    infeasible, count as ``r(k) = 0``.
    """

    def __init__(self, F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode):
        self.protocol = protocol
        self.strategy = strategy
        self.eta_mode = eta_mode
        self._states: list[BellDiagonalState] = [BellDiagonalState.werner(F0)]
        self._probs: list[float] = []
        self._r_ent: list[float] = [1.0]
        self._points: dict[int, CurvePoint] = {}

    def _extend(self, k: int) -> None:
        if k > MAX_ITERATIONS:
            raise DomainError(f"k = {k} exceeds the iteration cap {MAX_ITERATIONS}")
        while len(self._states) <= k:
            step = distill_step(self._states[-1], self.protocol)
            self._states.append(step.output)
            self._probs.append(step.success_probability)
            self._r_ent.append(self._r_ent[-1] * step.success_probability / 2)

    def p_ent(self, k: int) -> float:
        """Success probability of the round that consumes state ``k``."""
        self._extend(k + 1)
        return self._probs[k]

    def r_ent(self, k: int) -> float:
        self._extend(k)
        return self._r_ent[k]

    def eta(self, k: int) -> float:
        return self.eta_mode.eta(self.r_ent(k))

    def point(self, k: int) -> CurvePoint:
        if k not in self._points:
            self._extend(k)
            r_ent = self._r_ent[k]
            eta = self.eta_mode.eta(r_ent)
            F = self._states[k].F
            try:
                r_proc = _processing(F, self.strategy, eta)
            except DomainError:
                r_proc = 0.0
            self._points[k] = CurvePoint(k, r_ent, r_proc, r_ent * r_proc, eta, F)
        return self._points[k]

    def r(self, k: int) -> float:
        return self.point(k).r

    def r_proc(self, k: int) -> float:
        return self.point(k).r_proc

    def points(self, upto: int) -> list[CurvePoint]:
        return [self.point(k) for k in range(upto + 1)]


@dataclass(frozen=True)
class KLoc:
    k_loc: int
    saturated: bool = False
    no_key: bool = False


def _k_loc(curve: RateCurve, k_max: int) -> KLoc:
    start = next((k for k in range(k_max + 1) if curve.r(k) > 0), None)
    if start is None:
        return KLoc(0, no_key=True)
    for k in range(start, k_max):
        if curve.r(k + 1) < curve.r(k):
            return KLoc(k)
    return KLoc(k_max, saturated=True)


def find_k_loc(
    F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode, k_max: int = DEFAULT_K_MAX
) -> KLoc:
    """First strict descent of ``r`` after any leading zero plateau."""
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    return _k_loc(RateCurve(F0, protocol, strategy, eta_mode), k_max)


@dataclass(frozen=True)
class KappaBounds:
    kappa1: int
    kappa2: int
    kappa: int
    truncated: bool = False


def _kappa_bounds(curve: RateCurve, k_loc: int) -> KappaBounds:
    r_loc = curve.r(k_loc)
    if r_loc <= 0:
        raise DegenerateCurveError(f"r(k_loc = {k_loc}) is zero; no search window")
    limit = MAX_ITERATIONS - k_loc
    kappa1 = kappa2 = None
    headroom = curve.r_proc(k_loc)  # 2^kappa r_proc(k_loc) / prod p_ent
    for kappa in range(1, limit + 1):
        headroom *= 2 / curve.p_ent(k_loc + kappa - 1)
        if kappa1 is None:
            cap = max(0.0, 1 - 4 * curve.eta(k_loc + kappa))
            if headroom > cap:
                kappa1 = kappa
        if kappa2 is None and curve.r_ent(k_loc + kappa) < r_loc:
            kappa2 = kappa
        if kappa1 is not None and kappa2 is not None:
            break
    truncated = kappa1 is None and kappa2 is None
    k1 = kappa1 if kappa1 is not None else limit + 1
    k2 = kappa2 if kappa2 is not None else limit + 1
    return KappaBounds(k1, k2, min(k1, k2) - 1, truncated)


def kappa_bounds(
    k_loc: int, F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode
) -> KappaBounds:
    return _kappa_bounds(RateCurve(F0, protocol, strategy, eta_mode), k_loc)


@dataclass(frozen=True)
class KOptResult:
    k_loc: int
    kappa1: int
    kappa2: int
    kappa: int
    k_opt: int
    rate: float
    rate_curve: list[CurvePoint]
    eta_mode: EtaMode
    no_key: bool = False
    saturated: bool = False
    candidates: tuple[int, ...] = field(default=())

    def summary_line(self) -> str:
        return ",".join(
            [str(self.k_loc), str(self.kappa1), str(self.kappa2), str(self.kappa), str(self.k_opt), fmt(self.rate)]
        )

    def curve_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "r_ent", "r_proc", "r_total"])
        for p in self.rate_curve:
            w.writerow([p.k, fmt(p.r_ent), fmt(p.r_proc), fmt(p.r)])
        return buf.getvalue()


def find_k_opt(
    F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode, k_max: int = DEFAULT_K_MAX
) -> KOptResult:
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    curve = RateCurve(F0, protocol, strategy, eta_mode)
    loc = _k_loc(curve, k_max)
    if loc.no_key:
        return KOptResult(0, 0, 0, 0, 0, 0.0, curve.points(k_max), eta_mode, no_key=True, candidates=(0,))

    bounds = _kappa_bounds(curve, loc.k_loc)
    k_loc, kappa = loc.k_loc, bounds.kappa
    # k_loc + 1 is excluded by the strict descent, unless the scan saturated
    first = k_loc + 1 if loc.saturated else k_loc + 2
    candidates = (k_loc, *range(first, k_loc + kappa + 1))
    k_opt = k_loc
    for k in candidates:
        if curve.r(k) > curve.r(k_opt):
            k_opt = k
    while k_opt > 0 and curve.r(k_opt - 1) == curve.r(k_opt):
        k_opt -= 1
    upto = max(k_loc + kappa, k_loc + 1) if not loc.saturated else max(k_max, k_loc + kappa)
    upto = min(upto, MAX_ITERATIONS)
    return KOptResult(
        k_loc,
        bounds.kappa1,
        bounds.kappa2,
        kappa,
        k_opt,
        curve.r(k_opt),
        curve.points(upto),
        eta_mode,
        saturated=loc.saturated,
        candidates=candidates,
    )


def exhaustive_k_opt(
    F0: float, protocol: ProtocolKind, strategy: StrategyKind, eta_mode: EtaMode, k_max: int = DEFAULT_K_MAX
) -> tuple[int, list[float]]:
    """Brute-force argmax of ``r(k)`` over ``[0, k_max]``, each ``k`` from a fresh trajectory."""
    rates = []
    for k in range(k_max + 1):
        try:
            rates.append(total_rate(k, F0, protocol, strategy, eta_mode))
        except DomainError:
            rates.append(0.0)
    best = max(range(len(rates)), key=lambda k: (rates[k], -k))
    return best, rates
