"""Time-domain Maxwell-Bloch propagation over an inhomogeneous ensemble.

Retarded frame, tau = 1, distance in optical depths. At every depth slice
each detuning class is driven through the current field Omega(t); the
field then advances in z with the ensemble-averaged in-phase coherence

    dOmega/d(alpha z) = <v> / (2 pi G(0)),

which reproduces exp(-alpha z/2) area decay for weak pulses. The atom
step is a symmetric splitting into exact rotations (half precession,
pulse rotation, half precession), so the Bloch norm is conserved to
rounding when gamma = 0.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from .cascade import MediumConfig, cascade_solve
from .phasing import pulse_label

# the default layer probes for TBB and warns when it is absent
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

__all__ = [
    "PulseSpec",
    "EnsembleGrid",
    "OracleResolution",
    "FieldGrid",
    "ResolutionError",
    "time_span",
    "propagate",
    "slice_source",
    "extract_window_areas",
    "extract_echo_areas",
    "compare_areas",
    "compare_with_area_theorem",
    "CompareReport",
]

SHAPES = ("sech", "rectangular", "gaussian")


class ResolutionError(ValueError):
    """Grid too coarse for the pulses or ensemble."""


@dataclass(frozen=True)
class PulseSpec:
    area: float
    center_time: float
    duration: float = 1.0 / 40.0
    shape: str = "sech"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not 0 < self.duration <= 0.1:
            raise ValueError(f"pulse duration must be in (0, tau/10], got {self.duration}")

    def omega(self, t) -> np.ndarray:
        """Rabi frequency with time integral equal to ``area``."""
        x = (np.asarray(t, dtype=float) - self.center_time) / self.duration
        if self.shape == "sech":
            return self.area / (np.pi * self.duration) / np.cosh(np.clip(x, -700, 700))
        if self.shape == "gaussian":
            return self.area / (np.sqrt(2 * np.pi) * self.duration) * np.exp(-0.5 * x**2)
        return np.where(np.abs(x) <= 0.5, self.area / self.duration, 0.0)


@dataclass(frozen=True)
class EnsembleGrid:
    """Detuning classes with quadrature weights of a normalized G(Delta)."""

    detunings: np.ndarray
    weights: np.ndarray
    line_width: float
    center_density: float  # G(0) with integral of G equal to 1

    @classmethod
    def gaussian(cls, line_width: float, time_span: float, span_widths: float = 3.0,
                 oversample: float = 2.0) -> "EnsembleGrid":
        """Uniform midpoint grid over +/- span_widths * line_width.

        A uniform grid of spacing h makes the ensemble rephase spuriously
        every 2 pi / h; the spacing is chosen so this happens at
        ``oversample * time_span`` or later.
        """
        h = 2.0 * np.pi / (oversample * time_span)
        half = span_widths * line_width
        n_half = int(math.ceil(half / h))
        det = h * np.arange(-n_half, n_half + 1, dtype=float)
        g = np.exp(-0.5 * (det / line_width) ** 2)
        g0 = 1.0 / (np.sqrt(2.0 * np.pi) * line_width)
        return cls(det, g * h * g0, float(line_width), float(g0))

    @classmethod
    def gauss_hermite(cls, line_width: float, n_nodes: int = 201) -> "EnsembleGrid":
        """Gauss-Hermite nodes; only adequate for spans below ~sqrt(n)/line_width."""
        x, wq = np.polynomial.hermite.hermgauss(n_nodes)
        det = np.sqrt(2.0) * line_width * x
        g0 = 1.0 / (np.sqrt(2.0 * np.pi) * line_width)
        return cls(det, wq / np.sqrt(np.pi), float(line_width), float(g0))

    @property
    def size(self) -> int:
        return len(self.detunings)

    @property
    def spacing(self) -> float:
        d = np.diff(self.detunings)
        return float(d.max()) if len(d) else np.inf

    def check(self, time_span: float) -> None:
        if np.any(self.weights < 0):
            raise ResolutionError("ensemble weights must be non-negative")
        if not np.allclose(self.weights, self.weights[::-1], rtol=1e-10, atol=1e-300):
            raise ResolutionError("ensemble weights must be symmetric in detuning")
        if self.detunings[-1] - self.detunings[0] < 6 * self.line_width * (1 - 1e-9):
            raise ResolutionError("detuning span must cover at least 6 line widths")
        if 2.0 * np.pi / self.spacing <= time_span:
            raise ResolutionError(
                f"detuning spacing {self.spacing:.3g} rephases the ensemble at "
                f"t = {2 * np.pi / self.spacing:.3g} tau, inside the {time_span:.3g} tau window"
            )


@dataclass(frozen=True)
class OracleResolution:
    alpha_z_max: float = 5.0
    dz: float = 0.02
    steps_per_duration: int = 40
    max_echo_order: int = 1
    store_every: int = 1

    def __post_init__(self):
        if not 0 < self.dz <= 0.02:
            raise ResolutionError(f"dz must be in (0, 0.02], got {self.dz}")
        if self.steps_per_duration < 20:
            raise ResolutionError("need at least 20 time steps per pulse duration")
        if self.max_echo_order < 0:
            raise ValueError("max_echo_order must be >= 0")


@dataclass
class FieldGrid:
    t_grid: np.ndarray
    z_grid: np.ndarray
    omega: np.ndarray  # (len(z_grid), len(t_grid))
    norm_error: float = 0.0
    u_source_max: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    def areas(self) -> np.ndarray:
        return np.trapezoid(self.omega, self.t_grid, axis=1)

    def energies(self) -> np.ndarray:
        return np.trapezoid(self.omega**2, self.t_grid, axis=1)


_CHUNK = 64


@njit(cache=True, parallel=True)
def _slice_kernel(omega, dt, det, wts, gamma):
    """Per-chunk weighted sums of v(t) and u(t), and the worst norm drift."""
    n_t = omega.shape[0]
    n_a = det.shape[0]
    n_chunks = (n_a + _CHUNK - 1) // _CHUNK
    part_v = np.zeros((n_chunks, n_t))
    part_u = np.zeros((n_chunks, n_t))
    drift = np.zeros(n_chunks)
    cp = np.empty(n_t - 1)
    sp = np.empty(n_t - 1)
    for j in range(n_t - 1):
        a = 0.5 * (omega[j] + omega[j + 1]) * dt
        cp[j] = math.cos(a)
        sp[j] = math.sin(a)
    half_decay = math.exp(-0.5 * gamma * dt)
    for c in prange(n_chunks):
        lo = c * _CHUNK
        hi = min(n_a, lo + _CHUNK)
        worst = 0.0
        for k in range(lo, hi):
            ch = math.cos(0.5 * det[k] * dt) * half_decay
            sh = math.sin(0.5 * det[k] * dt) * half_decay
            u = 0.0
            v = 0.0
            w = -1.0
            wk = wts[k]
            for j in range(n_t - 1):
                u, v = ch * u - sh * v, sh * u + ch * v
                v, w = cp[j] * v + sp[j] * w, -sp[j] * v + cp[j] * w
                u, v = ch * u - sh * v, sh * u + ch * v
                part_v[c, j + 1] += wk * v
                part_u[c, j + 1] += wk * u
            if gamma == 0.0:
                d = abs(math.sqrt(u * u + v * v + w * w) - 1.0)
                if d > worst:
                    worst = d
        drift[c] = worst
    return part_v, part_u, drift


def _ordered_sum(parts: np.ndarray) -> np.ndarray:
    """Compensated sum over axis 0 in fixed order."""
    total = np.zeros(parts.shape[1])
    comp = np.zeros(parts.shape[1])
    for row in parts:
        y = row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _configure_threads() -> None:
    cap = os.environ.get("ECHO_AREA_THREADS")
    if cap:
        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def slice_source(omega: np.ndarray, dt: float, ensemble: EnsembleGrid,
                 gamma: float = 0.0) -> tuple[np.ndarray, np.ndarray, float]:
    """Drive every detuning class through ``omega`` from the ground state.

    Returns (<v>(t), <u>(t), max norm drift); averages use the G weights.
    """
    pv, pu, drift = _slice_kernel(np.ascontiguousarray(omega, dtype=float), float(dt),
                                  ensemble.detunings, ensemble.weights, float(gamma))
    return _ordered_sum(pv), _ordered_sum(pu), float(drift.max())


def _time_grid(pulses, res: OracleResolution):
    starts = [p.center_time for p in pulses] or [0.0]
    t0 = min(starts) - 0.5
    last = max(max(p.center_time for p in pulses) if pulses else 0.0,
               res.max_echo_order + 1 if res.max_echo_order else 0.0)
    t1 = last + 0.5
    shortest = min((p.duration for p in pulses), default=1.0 / 40.0)
    # an integer number of steps per half tau keeps window edges on the grid
    per_half = int(math.ceil(0.5 * res.steps_per_duration / shortest))
    dt = 0.5 / per_half
    n = int(round((t1 - t0) / dt))
    return t0 + dt * np.arange(n + 1)


def time_span(pulses: list[PulseSpec], res: OracleResolution) -> float:
    """Length of the retarded-time window the oracle will simulate."""
    t = _time_grid(pulses, res)
    return float(t[-1] - t[0])


def propagate(pulses: list[PulseSpec], ensemble: EnsembleGrid, medium: MediumConfig,
              res: OracleResolution = OracleResolution(), self_test: bool = True) -> FieldGrid:
    """Propagate the input pulses through alpha_z in [0, res.alpha_z_max].

    The z-march is a Heun start followed by second-order Adams-Bashforth
    steps in the field; each step costs one ensemble solve.
    """
    _configure_threads()
    if medium.initial_inversion != -1.0:
        raise ValueError("the oracle starts every atom in the ground state (initial_inversion -1)")
    for p in pulses:
        if abs(p.center_time - round(p.center_time)) > 1e-12:
            raise ValueError("pulse centers must be integer multiples of tau")
    t = _time_grid(pulses, res)
    dt = float(t[1] - t[0])
    span = float(t[-1] - t[0])
    for p in pulses:
        if dt > p.duration / 20.0:
            raise ResolutionError(f"dt={dt:.3g} does not resolve pulse duration {p.duration}")
    ensemble.check(span)
    gamma = -math.log(medium.gamma_tau)
    norm = 1.0 / (2.0 * np.pi * ensemble.center_density)

    omega = np.zeros_like(t)
    for p in pulses:
        omega += p.omega(t)

    if self_test and pulses:
        _check_normalization(pulses[0], t, dt, ensemble, gamma, norm)

    n_z = int(round(res.alpha_z_max / res.dz))
    dz = res.alpha_z_max / n_z if n_z else 0.0
    z_all = dz * np.arange(n_z + 1)
    keep = list(range(0, n_z + 1, res.store_every))
    if keep[-1] != n_z:
        keep.append(n_z)
    rows = [omega.copy()]
    worst_norm = 0.0
    worst_u = 0.0

    def source(om):
        nonlocal worst_norm, worst_u
        if not np.any(om):
            return np.zeros_like(om)
        sv, su, drift = slice_source(om, dt, ensemble, gamma)
        worst_norm = max(worst_norm, drift)
        worst_u = max(worst_u, float(np.max(np.abs(su))))
        return norm * sv

    prev = None
    for i in range(1, n_z + 1):
        s_now = source(omega)
        if prev is None:
            pred = omega + dz * s_now
            new = omega + 0.5 * dz * (s_now + source(pred))
        else:
            new = omega + dz * (1.5 * s_now - 0.5 * prev)
        if not np.all(np.isfinite(new)):
            raise FloatingPointError(
                f"non-finite field at alpha_z={z_all[i]:.4g}; "
                f"max |Omega| before step {np.max(np.abs(omega)):.4g}"
            )
        prev = s_now
        omega = new
        if i in keep:
            rows.append(omega.copy())
    return FieldGrid(
        t_grid=t,
        z_grid=z_all[keep],
        omega=np.array(rows),
        norm_error=worst_norm,
        u_source_max=worst_u,
        meta={"dt": dt, "dz": dz, "gamma": gamma, "n_detunings": ensemble.size},
    )


def _check_normalization(pulse, t, dt, ensemble, gamma, norm, rtol=0.02):
    """Weak copy of ``pulse`` must lose area at rate 1/2 per optical depth."""
    weak = PulseSpec(1e-3 * np.sign(pulse.area or 1.0), pulse.center_time,
                     pulse.duration, pulse.shape)
    om = weak.omega(t)
    sv, _, _ = slice_source(om, dt, ensemble, gamma)
    lo = pulse.center_time - 0.5
    m = (t >= lo - 1e-12) & (t <= pulse.center_time + 0.5 + 1e-12)
    rate = np.trapezoid(norm * sv[m], t[m]) / np.trapezoid(om[m], t[m])
    if not abs(rate + 0.5) <= 0.5 * rtol:
        raise ResolutionError(
            f"weak-pulse absorption rate {rate:.5f} differs from -1/2; "
            "ensemble does not resolve the pulse spectrum"
        )


def extract_window_areas(fgrid: FieldGrid, slots, tau: float = 1.0):
    """Signed area over [s tau - tau/2, s tau + tau/2] for each slot s.

    Returns (areas of shape (n_z, n_slots), overlap flags of the same
    shape). A window is flagged when the field at either edge exceeds 1%
    of its peak inside the window.
    """
    t = fgrid.t_grid
    areas = np.empty((len(fgrid.z_grid), len(slots)))
    flags = np.zeros_like(areas, dtype=bool)
    for col, s in enumerate(slots):
        lo, hi = s * tau - 0.5 * tau, s * tau + 0.5 * tau
        if lo < t[0] - 1e-9 or hi > t[-1] + 1e-9:
            raise ValueError(f"window [{lo}, {hi}] exceeds the time grid")
        m = (t >= lo - 1e-9) & (t <= hi + 1e-9)
        seg = fgrid.omega[:, m]
        areas[:, col] = np.trapezoid(seg, t[m], axis=1)
        peak = np.max(np.abs(seg), axis=1)
        edge = np.maximum(np.abs(seg[:, 0]), np.abs(seg[:, -1]))
        flags[:, col] = edge > 0.01 * peak
    return areas, flags


def extract_echo_areas(fgrid: FieldGrid, tau: float = 1.0, max_echo_order: int = 1):
    """Echo k is emitted at (k + 1) tau; returns (n_z, max_echo_order) areas."""
    areas, _ = extract_window_areas(fgrid, [k + 1 for k in range(1, max_echo_order + 1)], tau)
    return areas


def compare_areas(a: dict, b: dict) -> dict:
    """Per-label absolute differences of two {label: array} tables."""
    if set(a) != set(b):
        raise ValueError(f"label sets differ: {sorted(a)} vs {sorted(b)}")
    return {k: np.abs(np.asarray(a[k]) - np.asarray(b[k])) for k in a}


@dataclass
class CompareReport:
    z_grid: np.ndarray
    oracle: dict
    cascade: dict
    deviation: dict
    overlap: dict

    @property
    def max_deviation(self) -> float:
        return max(float(np.max(d)) for d in self.deviation.values())

    def max_deviation_by_label(self) -> dict:
        return {k: float(np.max(d)) for k, d in self.deviation.items()}


def compare_with_area_theorem(pulses: list[PulseSpec], ensemble: EnsembleGrid,
                              medium: MediumConfig, res: OracleResolution = OracleResolution(),
                              cascade_medium: MediumConfig | None = None) -> CompareReport:
    """Run both pipelines and tabulate per-pulse area differences over z."""
    if len(pulses) != 2 or [p.center_time for p in pulses] != [0.0, 1.0]:
        raise ValueError("comparison needs exactly two input pulses centered at 0 and tau")
    if cascade_medium is None:
        cascade_medium = MediumConfig(alpha_z_max=res.alpha_z_max, dz=1e-3,
                                      gamma_tau=medium.gamma_tau,
                                      initial_inversion=medium.initial_inversion)
    if cascade_medium.gamma_tau != medium.gamma_tau:
        raise ValueError(
            f"gamma_tau mismatch: oracle {medium.gamma_tau} vs cascade {cascade_medium.gamma_tau}"
        )
    if cascade_medium.initial_inversion != medium.initial_inversion:
        raise ValueError("initial_inversion mismatch between pipelines")
    if cascade_medium.alpha_z_max < res.alpha_z_max:
        raise ValueError("cascade grid is shorter than the oracle grid")
    k = max(res.max_echo_order, 1)
    fgrid = propagate(pulses, ensemble, medium, res)
    slots = list(range(k + 2))
    areas, flags = extract_window_areas(fgrid, slots)
    traj = cascade_solve(cascade_medium, pulses[0].area, pulses[1].area,
                         max_echo_order=k, drop_threshold=0.0)
    labels = [pulse_label(s) for s in slots]
    oracle = {lab: areas[:, i] for i, lab in enumerate(labels)}
    casc = {lab: np.interp(fgrid.z_grid, traj.z_grid, traj.theta[lab]) for lab in labels}
    return CompareReport(
        z_grid=fgrid.z_grid,
        oracle=oracle,
        cascade=casc,
        deviation=compare_areas(oracle, casc),
        overlap={lab: flags[:, i] for i, lab in enumerate(labels)},
    )
