"""Coherence-decay spectroscopy from primary-echo areas in a dense medium.

The echo area after delay m*tau obeys the closed form
    tan(theta_e/2) = G**(2m) sin(theta1) sin^2(theta2(z)/2) sinh(alpha z/2)
so G = exp(-gamma tau) is recovered from areas without assuming the
dilute-medium law I_echo ~ G**2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .areas import theta2_closed

__all__ = ["FitResult", "echo_area_model", "fit_gamma_tau"]


@dataclass(frozen=True)
class FitResult:
    gamma_tau: float  # fitted survival factor per unit delay
    gamma: float  # decay rate in 1/tau
    residuals: np.ndarray  # measured - model areas (rad)
    beer_gamma_tau: float
    beer_gamma: float
    degenerate: bool = False


def echo_area_model(tau_multiple, gamma_tau, theta1_in, theta2_in, alpha_z):
    """Primary-echo area at optical depth ``alpha_z`` for delays m*tau."""
    m = np.asarray(tau_multiple, dtype=float)
    th2 = theta2_closed(theta1_in, theta2_in, alpha_z)
    k = np.sin(theta1_in) * np.sin(th2 / 2.0) ** 2 * np.sinh(alpha_z / 2.0)
    return 2.0 * np.arctan(gamma_tau ** (2.0 * m) * k)


def fit_gamma_tau(measurements, theta1_in: float, theta2_in: float,
                  alpha_z: float) -> FitResult:
    """Least-squares inversion of the echo-area law for G = exp(-gamma tau).

    ``measurements`` is a sequence of (tau_multiple, echo_area) pairs. The
    dilute-medium (Beer law) estimate, which reads the echo intensity as
    area**2 proportional to G**(2m), is returned alongside for contrast.
    """
    data = np.asarray(measurements, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 2:
        raise ValueError("need at least two (tau_multiple, echo_area) pairs")
    m, area = data[:, 0], data[:, 1]
    if np.any(area <= 0) or np.any(area >= np.pi):
        raise ValueError("echo areas must lie in (0, pi)")
    if np.ptp(m) == 0:
        raise ValueError("all measurements share one delay; gamma is not identifiable")
    degenerate = bool(np.ptp(area) == 0)
    if degenerate:
        warnings.warn("all echo areas are equal; the fitted decay is degenerate", stacklevel=2)

    th2 = theta2_closed(theta1_in, theta2_in, alpha_z)
    k = np.sin(theta1_in) * np.sin(th2 / 2.0) ** 2 * np.sinh(alpha_z / 2.0)
    if k <= 0:
        raise ValueError("input areas give no primary echo at this depth")

    # log-linear start: ln(tan(area/2)/k) = -2 gamma m
    y = np.log(np.tan(area / 2.0) / k)
    g0 = max(-np.dot(m, y) / (2.0 * np.dot(m, m)), 0.0)

    def resid(p):
        return area - 2.0 * np.arctan(np.exp(-2.0 * p[0] * m) * k)

    sol = least_squares(resid, [g0], bounds=([0.0], [np.inf]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    gamma = float(sol.x[0])

    slope = np.polyfit(m, np.log(area**2), 1)[0]
    beer_gamma = float(-slope / 2.0)
    return FitResult(
        gamma_tau=float(np.exp(-gamma)),
        gamma=gamma,
        residuals=resid(sol.x),
        beer_gamma_tau=float(np.exp(-beer_gamma)),
        beer_gamma=beer_gamma,
        degenerate=degenerate,
    )
