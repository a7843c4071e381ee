"""Exceptional-point dynamics of dissipative quantum-dot chains.

Exact single-particle (Heisenberg-picture) dynamics, Lindblad master-equation
dynamics, exceptional-point location and classification, anomalous-relaxation
analysis, closed-form chain spectra, and a finite-bath brute-force oracle.
"""

from .model import (
    ChainParams,
    InitialConditions,
    QuadratureSettings,
    ReservoirSpec,
    RunConfig,
    TimeGrid,
    TimeSeries,
    ValidationError,
    fermi,
    load_config,
    validate,
)
from .linalg import NumericalError

__version__ = "1.0.0"

__all__ = [
    "ChainParams",
    "InitialConditions",
    "QuadratureSettings",
    "ReservoirSpec",
    "RunConfig",
    "TimeGrid",
    "TimeSeries",
    "ValidationError",
    "NumericalError",
    "fermi",
    "load_config",
    "validate",
    "__version__",
]
