"""Pulse-area evolution with optical depth: closed forms and the echo-area ODE.

Distances are optical depths (alpha * z); areas are signed radians.
All closed forms are branch-corrected so that a trajectory starting in
(2 pi m - pi, 2 pi m + pi) stays there and is continuous in z.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ClosedFormParams",
    "branch_offset",
    "theta1_closed",
    "theta2_closed",
    "mccall_hahn_closed",
    "total_echo_area",
    "echo_area_rhs",
    "eta_step",
    "primary_echo_closed",
    "secondary_echo_approx",
    "reseeded_follower",
]

TWO_PI = 2.0 * np.pi


def branch_offset(theta0):
    """2 pi times the index of the branch interval (2 pi m - pi, 2 pi m + pi]."""
    return TWO_PI * np.floor((np.asarray(theta0, dtype=float) + np.pi) / TWO_PI)


def _on_separatrix(theta0) -> np.ndarray:
    """True where theta0 is an odd multiple of pi (unstable fixed point)."""
    r = np.mod(np.asarray(theta0, dtype=float) - np.pi, TWO_PI)
    return np.isclose(r, 0.0, atol=1e-15) | np.isclose(r, TWO_PI, atol=1e-15)


def _from_eta(eta, offset):
    return offset + 2.0 * np.arctan(eta)


@dataclass(frozen=True)
class ClosedFormParams:
    beta: float
    kappa: float

    @classmethod
    def from_inputs(cls, theta1_in: float, theta2_in: float) -> "ClosedFormParams":
        return cls(
            float(np.log(np.tan(theta1_in / 2.0))),
            float(np.tan(theta2_in / 2.0) / np.sin(theta1_in)),
        )


def theta1_closed(theta1_in, alpha_z):
    """Area of a pulse entering the unexcited absorber (w0 = -1)."""
    theta1_in = np.asarray(theta1_in, dtype=float)
    z = np.asarray(alpha_z, dtype=float)
    off = branch_offset(theta1_in)
    eta = np.exp(-z / 2.0) * np.tan(theta1_in / 2.0)
    out = _from_eta(eta, off)
    sep = _on_separatrix(theta1_in)
    out = np.where(sep, theta1_in + 0.0 * z, out)
    return out[()] if out.ndim == 0 else out


def theta2_closed(theta1_in, theta2_in, alpha_z):
    """Area of the second pulse, which sees the inversion -cos(theta1(z)).

    Equivalent to 2 arctan[kappa sech(beta - alpha_z/2)] with the branch
    offset of theta2_in; written in a form that also covers theta1_in = 0
    and first-pulse areas outside (0, pi).
    """
    th1 = np.asarray(theta1_in, dtype=float)
    th2 = np.asarray(theta2_in, dtype=float)
    z = np.asarray(alpha_z, dtype=float)
    off = branch_offset(th2)
    eta0 = np.tan(th2 / 2.0)
    sep1 = _on_separatrix(th1)
    t0 = np.where(sep1, 0.0, np.tan(th1 / 2.0))
    decay = np.exp(-z / 2.0)
    t = t0 * decay
    # eta2(z) = eta2(0) e^{-z/2} (1 + t0^2) / (1 + t(z)^2)
    eta = eta0 * decay * (1.0 + t0**2) / (1.0 + t**2)
    # first pulse parked at an odd multiple of pi: constant w0 = +1
    eta = np.where(sep1, eta0 * np.exp(z / 2.0), eta)
    out = _from_eta(eta, off)
    out = np.where(_on_separatrix(th2), th2 + 0.0 * z, out)
    return out[()] if out.ndim == 0 else out


def mccall_hahn_closed(theta1_in, theta2_in, alpha_z):
    """Total area of all pulses when the pair is treated as one pulse."""
    return theta1_closed(np.asarray(theta1_in) + np.asarray(theta2_in), alpha_z)


def total_echo_area(theta1_in, theta2_in, alpha_z):
    """Sum of all echo areas: McCall-Hahn total minus both input areas."""
    return (mccall_hahn_closed(theta1_in, theta2_in, alpha_z)
            - theta2_closed(theta1_in, theta2_in, alpha_z)
            - theta1_closed(theta1_in, alpha_z))


def echo_area_rhs(theta, v0, w0):
    """d theta / d(alpha z) for an echo driven by phased coherence v0."""
    return 0.5 * (2.0 * v0 * np.cos(theta / 2.0) ** 2 + w0 * np.sin(theta))


def _phi1(a):
    """(exp(a) - 1) / a, finite at a = 0."""
    a = np.asarray(a, dtype=float)
    small = np.abs(a) < 1e-8
    safe = np.where(small, 1.0, a)
    return np.where(small, 1.0 + 0.5 * a, np.expm1(safe) / safe)


def eta_step(eta, v0, w0, dz):
    """Exact step of d eta/dz = (v0 + w0 eta)/2 with v0, w0 frozen.

    eta = tan(theta/2). For w0 != 0 this is
    (eta + v0/w0) exp(w0 dz/2) - v0/w0, and eta + v0 dz/2 at w0 = 0.
    """
    a = 0.5 * np.asarray(w0, dtype=float) * dz
    return eta * np.exp(a) + 0.5 * np.asarray(v0) * dz * _phi1(a)


def primary_echo_closed(theta1_in, theta2_z, gamma_tau, alpha_z):
    """Primary echo area with the second pulse's area taken at the same depth."""
    return 2.0 * np.arctan(
        gamma_tau**2 * np.sin(theta1_in) * np.sin(np.asarray(theta2_z) / 2.0) ** 2
        * np.sinh(np.asarray(alpha_z) / 2.0)
    )


def reseeded_follower(lead_at_handoff: float, follow_at_handoff: float,
                      handoff_z: float) -> Callable:
    """Area of a following pulse after the handoff depth.

    The pair (lead, follow) is treated as a fresh two-pulse input at
    ``handoff_z``, so the follower obeys the second-pulse closed form.
    """
    def fn(alpha_z):
        return theta2_closed(lead_at_handoff, follow_at_handoff,
                             np.asarray(alpha_z, dtype=float) - handoff_z)
    return fn


def secondary_echo_approx(handoff_z1: float, theta2_at_z1: float,
                          theta_e1_fn: Callable, gamma_tau: float, alpha_z):
    """Approximate next-echo area once the first input pulse is absorbed.

    Stimulated-echo sources are neglected and the echo is treated as the
    two-pulse echo of (theta2, theta_e1) launched at ``handoff_z1``.
    """
    z = np.asarray(alpha_z, dtype=float)
    if np.any(z < handoff_z1):
        raise ValueError(f"alpha_z must be >= handoff depth {handoff_z1}")
    return 2.0 * np.arctan(
        gamma_tau * np.sin(theta2_at_z1) * np.sin(theta_e1_fn(z) / 2.0) ** 2
        * np.sinh((z - handoff_z1) / 2.0)
    )
