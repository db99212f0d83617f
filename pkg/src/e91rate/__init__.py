"""Secret-key rates for entanglement-based QKD with CHSH security checks.

Covers the chain from recurrence distillation of Werner pairs through the
choice of measurement bases to the Devetak-Winter key rate.
"""

from .distillation import BBPSSW, DEJMPS, ProtocolKind, distill_step, ent_rate, trajectory
from .errors import DomainError
from .keyrate import basis_grid_oracle, devetak_winter_rate, optimal_rate_werner, threshold_fidelity
from .kopt import EtaMode, find_k_opt
from .quantum import BellDiagonalState, WernerState, bell_phi_plus, werner_from_fidelity
from .strategy import ASYMMETRIC, SYMMETRIC, StrategyKind, boundary_fidelity, processing_rate, region_map

__version__ = "0.1.0"

__all__ = [
    "ASYMMETRIC",
    "BBPSSW",
    "BellDiagonalState",
    "DEJMPS",
    "DomainError",
    "EtaMode",
    "ProtocolKind",
    "StrategyKind",
    "SYMMETRIC",
    "WernerState",
    "basis_grid_oracle",
    "bell_phi_plus",
    "boundary_fidelity",
    "devetak_winter_rate",
    "distill_step",
    "ent_rate",
    "find_k_opt",
    "optimal_rate_werner",
    "processing_rate",
    "region_map",
    "threshold_fidelity",
    "trajectory",
    "werner_from_fidelity",
]
