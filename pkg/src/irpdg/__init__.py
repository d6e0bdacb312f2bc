"""Invariant-region-preserving DG/FV schemes for the compressible Euler
equations (1D and 2D), with an explicit admissibility limiter."""

from ._kernels import BACKEND as kernel_backend
from .euler import GasModel, State1, State2
from .limiter import LimiterConfig, RegionViolationError
from .solver import CflPolicy, DGSolution, Mesh

__version__ = "0.1.0"

__all__ = [
    "GasModel",
    "State1",
    "State2",
    "LimiterConfig",
    "RegionViolationError",
    "CflPolicy",
    "DGSolution",
    "Mesh",
    "kernel_backend",
    "__version__",
]
