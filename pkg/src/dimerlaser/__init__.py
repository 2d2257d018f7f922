"""Simulation of two evanescently coupled semiconductor nanolasers.

Langevin rate equations for the cavity fields and carrier populations,
trajectory ensembles with reproducible counter-based random streams, and
the statistical estimators (order parameter moments, zero-delay photon
correlations, equilibrium-distribution fits) used to characterise the
mode-beating limit cycle around the bonding/antibonding switching point.
"""

__version__ = "0.1.0"

from .model import (
    CavityState,
    ModalFrame,
    PhysicalParams,
    PumpSchedule,
    reference_params,
    transparency_pump,
)
from .sde import IntegratorConfig, TrajectoryRecord, integrate
from .ensemble import EnsembleConfig, EnsembleResult, run_ensemble

__all__ = [
    "CavityState",
    "EnsembleConfig",
    "EnsembleResult",
    "IntegratorConfig",
    "ModalFrame",
    "PhysicalParams",
    "PumpSchedule",
    "TrajectoryRecord",
    "integrate",
    "reference_params",
    "run_ensemble",
    "transparency_pump",
]
