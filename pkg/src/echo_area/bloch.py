"""Single-atom Bloch dynamics in the hard-pulse limit.

Units: the pulse delay tau is 1, detunings are in 1/tau, and the Bloch
vector is (u, v, w) with the ground state at (0, 0, -1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BlochVector",
    "PulseRotation",
    "FreeEvolution",
    "GROUND",
    "apply_pulse",
    "free_evolve",
    "resonant_pulse_response",
    "bloch_rhs",
    "rk4_bloch",
]


@dataclass(frozen=True)
class BlochVector:
    u: float
    v: float
    w: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w], dtype=float)

    @classmethod
    def from_array(cls, r) -> "BlochVector":
        return cls(float(r[0]), float(r[1]), float(r[2]))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.u**2 + self.v**2 + self.w**2))


GROUND = BlochVector(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class PulseRotation:
    """Instantaneous resonant pulse of signed area ``theta`` (radians)."""

    theta: float


@dataclass(frozen=True)
class FreeEvolution:
    """Free precession at ``detuning`` with coherence decay ``gamma``."""

    duration: float
    detuning: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")


def apply_pulse(state: BlochVector, rot: PulseRotation) -> BlochVector:
    """Rotate about the u axis by the pulse area."""
    c, s = np.cos(rot.theta), np.sin(rot.theta)
    return BlochVector(state.u, state.v * c + state.w * s, -state.v * s + state.w * c)


def free_evolve(state: BlochVector, ev: FreeEvolution) -> BlochVector:
    """Precess (u, v) by detuning*duration and damp it by exp(-gamma*duration)."""
    phi = ev.detuning * ev.duration
    decay = np.exp(-ev.gamma * ev.duration)
    c, s = np.cos(phi), np.sin(phi)
    return BlochVector(
        decay * (c * state.u - s * state.v),
        decay * (s * state.u + c * state.v),
        state.w,
    )


def resonant_pulse_response(v0: float, w0: float, theta_partial: float) -> tuple[float, float]:
    """Resonant (v, w) after a partial pulse area, relaxation neglected."""
    c, s = np.cos(theta_partial), np.sin(theta_partial)
    return v0 * c + w0 * s, w0 * c - v0 * s


def bloch_rhs(r: np.ndarray, omega: float, detuning: float, gamma: float) -> np.ndarray:
    """Time derivative of (u, v, w) for a real Rabi frequency."""
    u, v, w = r
    return np.array([
        -detuning * v - gamma * u,
        detuning * u - gamma * v + omega * w,
        -omega * v,
    ])


def rk4_bloch(r0, omega_fn, t0: float, t1: float, n_steps: int,
              detuning: float = 0.0, gamma: float = 0.0) -> np.ndarray:
    """Classic RK4 integration of the single-atom Bloch equations.

    Used as a time-domain reference for the exact rotation formulas.
    ``omega_fn`` maps time to the (real) Rabi frequency.
    """
    r = np.asarray(r0, dtype=float).copy()
    h = (t1 - t0) / n_steps
    t = t0
    for _ in range(n_steps):
        k1 = bloch_rhs(r, omega_fn(t), detuning, gamma)
        k2 = bloch_rhs(r + 0.5 * h * k1, omega_fn(t + 0.5 * h), detuning, gamma)
        k3 = bloch_rhs(r + 0.5 * h * k2, omega_fn(t + 0.5 * h), detuning, gamma)
        k4 = bloch_rhs(r + h * k3, omega_fn(t + h), detuning, gamma)
        r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return r
