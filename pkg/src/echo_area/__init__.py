"""Pulse and echo areas in optically dense two-level absorbers."""
from .areas import (
    mccall_hahn_closed,
    primary_echo_closed,
    secondary_echo_approx,
    theta1_closed,
    theta2_closed,
    total_echo_area,
)
from .bloch import BlochVector, FreeEvolution, PulseRotation
from .cascade import AreaTrajectory, MediumConfig, cascade_solve
from .fitting import FitResult, fit_gamma_tau
from .phasing import PhasingSources, extract_phasing, phasing_sources

__version__ = "0.1.0"

__all__ = [
    "AreaTrajectory",
    "BlochVector",
    "FitResult",
    "FreeEvolution",
    "MediumConfig",
    "PhasingSources",
    "PulseRotation",
    "cascade_solve",
    "extract_phasing",
    "fit_gamma_tau",
    "mccall_hahn_closed",
    "phasing_sources",
    "primary_echo_closed",
    "secondary_echo_approx",
    "theta1_closed",
    "theta2_closed",
    "total_echo_area",
]
