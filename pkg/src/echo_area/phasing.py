"""Symbolic expansion of multi-pulse Bloch sequences and phasing extraction.

A Bloch component after a sequence of hard pulses spaced by tau is a sum
of terms

    coefficient * G**p * prod_i f_i(theta_i) * {cos, sin}(n * Delta * tau)

where ``G`` is the per-interval coherence survival factor exp(-gamma*tau)
and each ``f_i`` is 1, cos(theta_i) or sin(theta_i). Every pulse label
appears at most once per term, so the {1, cos, sin} products form a
canonical (multilinear) basis and two expressions are equal exactly when
their coefficient tables are equal. Coefficients are ``Fraction``.

The slowly varying part at an emission time is the harmonic-zero cosine
term of v (the phased coherence) and the harmonic-zero term of w (the
spectrally uniform inversion); everything else averages out over a broad
inhomogeneous line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "pulse_label",
    "label_index",
    "TrigMonomial",
    "TrigPoly",
    "HarmonicTerm",
    "SymbolicBlochState",
    "PhasingSources",
    "ground_state",
    "symbolic_apply_pulse",
    "symbolic_free_evolve",
    "pulse_sequence",
    "extract_phasing",
    "phasing_sources",
    "evaluate_sources",
]


def pulse_label(j: int) -> str:
    """Label of the j-th pulse (0-based): '1', '2', 'e1', 'e2', ..."""
    if j < 0:
        raise ValueError("pulse index must be >= 0")
    return str(j + 1) if j < 2 else f"e{j - 1}"


_LABEL_RE = re.compile(r"^(?:([12])|e([1-9][0-9]*))$")


def label_index(label: str) -> int:
    """Inverse of :func:`pulse_label`; the pulse's time slot in units of tau."""
    m = _LABEL_RE.match(label)
    if m is None:
        raise ValueError(f"unknown pulse label {label!r}")
    return int(m.group(1)) - 1 if m.group(1) else int(m.group(2)) + 1


# factor codes inside a monomial key
_COS, _SIN = "c", "s"

# key: (gamma_power, ((label, code), ...)) with labels in time order
Key = tuple


def _key(gamma_power: int, factors) -> Key:
    return (gamma_power, tuple(sorted(factors, key=lambda f: label_index(f[0]))))


@dataclass(frozen=True)
class TrigMonomial:
    coefficient: Fraction
    factors: tuple  # ((label, 'c' | 's'), ...)
    gamma_power: int


class TrigPoly:
    """Exact polynomial in G and cos/sin of pulse areas (multilinear per label)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Fraction] | None = None):
        self._terms = {k: Fraction(c) for k, c in (terms or {}).items() if c != 0}

    # constructors
    @classmethod
    def const(cls, value=1) -> "TrigPoly":
        return cls({_key(0, ()): Fraction(value)})

    @classmethod
    def cos(cls, label: str) -> "TrigPoly":
        return cls({_key(0, ((label, _COS),)): Fraction(1)})

    @classmethod
    def sin(cls, label: str) -> "TrigPoly":
        return cls({_key(0, ((label, _SIN),)): Fraction(1)})

    @classmethod
    def sin_half_sq(cls, label: str) -> "TrigPoly":
        return (cls.const(1) - cls.cos(label)) * Fraction(1, 2)

    @classmethod
    def cos_half_sq(cls, label: str) -> "TrigPoly":
        return (cls.const(1) + cls.cos(label)) * Fraction(1, 2)

    @classmethod
    def gamma(cls, power: int = 1) -> "TrigPoly":
        return cls({_key(power, ()): Fraction(1)})

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.const(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return TrigPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            f = Fraction(other)
            return TrigPoly({k: c * f for k, c in self._terms.items()})
        out: dict = {}
        for (pa, fa), ca in self._terms.items():
            la = {lab for lab, _ in fa}
            for (pb, fb), cb in other._terms.items():
                if la.intersection(lab for lab, _ in fb):
                    raise ValueError("repeated pulse label in a product")
                k = _key(pa + pb, fa + fb)
                out[k] = out.get(k, 0) + ca * cb
        return TrigPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        return f"TrigPoly({self.to_text()})"

    def items(self):
        return self._terms.items()

    def monomials(self) -> Iterator[TrigMonomial]:
        for (p, f), c in sorted(self._terms.items(), key=_sort_key):
            yield TrigMonomial(c, f, p)

    def labels(self) -> set[str]:
        return {lab for (_, f) in self._terms for lab, _ in f}

    def shift_gamma(self, k: int) -> "TrigPoly":
        return TrigPoly({(p + k, f): c for (p, f), c in self._terms.items()})

    def times_factor(self, label: str, code: str) -> "TrigPoly":
        out = {}
        for (p, f), c in self._terms.items():
            out[_key(p, f + ((label, code),))] = c
        return TrigPoly(out)

    def evaluate(self, areas: Mapping[str, float], gamma_tau: float) -> float:
        total = 0.0
        for (p, f), c in self._terms.items():
            term = float(c) * gamma_tau**p
            for lab, code in f:
                th = areas[lab]
                term *= np.cos(th) if code == _COS else np.sin(th)
            total += term
        return total

    def to_text(self, half_angle: bool = True) -> str:
        """Plain-text rendering: s1, c2, se1, G^2; half angles as sin^2(e1/2)."""
        if not self._terms:
            return "0"
        groups = _half_angle_form(self._terms) if half_angle else [
            (c, p, tuple((lab, code) for lab, code in f)) for (p, f), c in self._terms.items()
        ]
        groups.sort(key=lambda g: (g[1], [(label_index(l), k) for l, k in g[2]]))
        parts = []
        for coef, p, factors in groups:
            names = [("G" if p == 1 else f"G^{p}")] if p else []
            for lab, code in factors:
                names.append(_factor_name(lab, code))
            mag = abs(coef)
            body = "*".join(names)
            if mag != 1 or not body:
                body = f"{mag}*{body}" if body else f"{mag}"
            parts.append(("-" if coef < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _sort_key(item):
    (p, f), _ = item
    return (p, [(label_index(l), k) for l, k in f])


def _factor_name(label: str, code: str) -> str:
    if code == _COS:
        return f"c{label}"
    if code == _SIN:
        return f"s{label}"
    if code == "S":
        return f"sin^2({label}/2)"
    return f"cos^2({label}/2)"


def _half_angle_form(terms):
    """Regroup 1 +/- cos(theta) pairs into 2*cos^2(theta/2) / 2*sin^2(theta/2).

    Returns a list of (coefficient, gamma_power, factors) where factor codes
    may also be 'S' (sin^2 of half angle) or 'C' (cos^2 of half angle).
    """
    cur = {(p, tuple(f)): c for (p, f), c in terms.items()}
    labels = sorted({lab for (_, f) in cur for lab, _ in f}, key=label_index)
    for lab in labels:
        pairs: dict = {}
        rest_terms = {}
        for (p, f), c in cur.items():
            codes = dict(f)
            code = codes.get(lab)
            if code in (None, _COS):
                rest = (p, tuple(x for x in f if x[0] != lab))
                a, b = pairs.get(rest, (0, 0))
                pairs[rest] = (a + c, b) if code is None else (a, b + c)
            else:
                rest_terms[(p, f)] = c
        for (p, rest), (a, b) in pairs.items():
            if a == 0 or b == 0:
                if a:
                    rest_terms[(p, rest)] = rest_terms.get((p, rest), 0) + a
                if b:
                    k = (p, rest + ((lab, _COS),))
                    rest_terms[k] = rest_terms.get(k, 0) + b
                continue
            # a + b*cos = (a + b) cos^2(x/2) + (a - b) sin^2(x/2)
            for code, coef in (("C", a + b), ("S", a - b)):
                if coef:
                    k = (p, rest + ((lab, code),))
                    rest_terms[k] = rest_terms.get(k, 0) + coef
        cur = rest_terms
    out = []
    for (p, f), c in cur.items():
        if c:
            out.append((c, p, tuple(sorted(f, key=lambda x: label_index(x[0])))))
    return out


ZERO = TrigPoly()

# harmonic component key: (quadrature, n) with quadrature in {'cos', 'sin'}
# and n >= 0 (n > 0 for 'sin'); the argument is n * Delta * tau at the
# state's current time.


@dataclass(frozen=True)
class HarmonicTerm:
    monomial: TrigMonomial
    harmonic: int
    quadrature: str


def _add_into(comp: dict, quad: str, n: int, poly: TrigPoly, sign: int = 1) -> None:
    if n < 0:
        n = -n
        if quad == "sin":
            sign = -sign
    if quad == "sin" and n == 0:
        return
    if not poly:
        return
    key = (quad, n)
    new = comp.get(key, ZERO) + (poly if sign > 0 else -poly)
    if new:
        comp[key] = new
    else:
        comp.pop(key, None)


def _times_trig(comp: dict, quad_k: str, k: int) -> dict:
    """Multiply a harmonic component by cos(k x) or sin(k x), product-to-sum."""
    out: dict = {}
    half = Fraction(1, 2)
    for (q, n), poly in comp.items():
        p = poly * half
        if q == "cos" and quad_k == "cos":
            _add_into(out, "cos", n - k, p)
            _add_into(out, "cos", n + k, p)
        elif q == "sin" and quad_k == "cos":
            _add_into(out, "sin", n + k, p)
            _add_into(out, "sin", n - k, p)
        elif q == "cos" and quad_k == "sin":
            _add_into(out, "sin", n + k, p)
            _add_into(out, "sin", n - k, p, sign=-1)
        else:
            _add_into(out, "cos", n - k, p)
            _add_into(out, "cos", n + k, p, sign=-1)
    return out


def _combine(*parts) -> dict:
    out: dict = {}
    for comp, sign in parts:
        for (q, n), poly in comp.items():
            _add_into(out, q, n, poly, sign)
    return out


def _map(comp: dict, fn) -> dict:
    out: dict = {}
    for (q, n), poly in comp.items():
        _add_into(out, q, n, fn(poly))
    return out


@dataclass(frozen=True)
class SymbolicBlochState:
    """Bloch vector as harmonic sums; ``time`` counts elapsed tau intervals."""

    u: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    w: dict = field(default_factory=dict)
    labels: tuple = ()
    time: int = 0

    def terms(self, component: str) -> Iterator[HarmonicTerm]:
        for (q, n), poly in sorted(getattr(self, component).items()):
            for mono in poly.monomials():
                yield HarmonicTerm(mono, n, q)

    def term_count(self) -> int:
        return sum(len(p) for comp in (self.u, self.v, self.w) for p in comp.values())

    def evaluate(self, areas: Mapping[str, float], gamma_tau: float,
                 detuning_tau) -> np.ndarray:
        """Numeric (u, v, w) at the current time for detuning*tau values."""
        x = np.asarray(detuning_tau, dtype=float)
        out = []
        for comp in (self.u, self.v, self.w):
            acc = np.zeros_like(x)
            for (q, n), poly in comp.items():
                trig = np.cos(n * x) if q == "cos" else np.sin(n * x)
                acc = acc + poly.evaluate(areas, gamma_tau) * trig
            out.append(acc)
        return np.array(out)


def ground_state() -> SymbolicBlochState:
    return SymbolicBlochState(w={("cos", 0): TrigPoly.const(-1)})


def symbolic_apply_pulse(state: SymbolicBlochState, label: str) -> SymbolicBlochState:
    """Rotate about u by theta_label: v -> v c + w s, w -> -v s + w c."""
    if label in state.labels:
        raise ValueError(f"pulse label {label!r} already applied")
    label_index(label)

    def cos_(p):
        return p.times_factor(label, _COS)

    def sin_(p):
        return p.times_factor(label, _SIN)

    v = _combine((_map(state.v, cos_), 1), (_map(state.w, sin_), 1))
    w = _combine((_map(state.v, sin_), -1), (_map(state.w, cos_), 1))
    return SymbolicBlochState(dict(state.u), v, w, state.labels + (label,), state.time)


def symbolic_free_evolve(state: SymbolicBlochState, intervals: int) -> SymbolicBlochState:
    """Precess (u, v) by intervals*Delta*tau and damp by G**intervals."""
    if intervals < 0:
        raise ValueError("intervals must be >= 0")
    if intervals == 0:
        return state
    k = intervals
    u = _combine((_times_trig(state.u, "cos", k), 1), (_times_trig(state.v, "sin", k), -1))
    v = _combine((_times_trig(state.u, "sin", k), 1), (_times_trig(state.v, "cos", k), 1))
    u = _map(u, lambda p: p.shift_gamma(k))
    v = _map(v, lambda p: p.shift_gamma(k))
    return SymbolicBlochState(u, v, dict(state.w), state.labels, state.time + k)


def pulse_sequence(n_pulses: int) -> SymbolicBlochState:
    """Ground state driven by pulses '1', '2', 'e1', ... at t = 0, tau, 2 tau, ...

    The returned state sits just after the last pulse.
    """
    state = ground_state()
    for j in range(n_pulses):
        if j:
            state = symbolic_free_evolve(state, 1)
        state = symbolic_apply_pulse(state, pulse_label(j))
    return state


@dataclass(frozen=True)
class PhasingSources:
    """Phased resonant coherence v0 and uniform inversion w0 for one echo."""

    v0_expr: TrigPoly
    w0_expr: TrigPoly
    echo_index: int
    labels: tuple

    @property
    def emission_time(self) -> int:
        return self.echo_index + 1

    def to_text(self) -> str:
        return f"v0 = {self.v0_expr.to_text()}\nw0 = {self.w0_expr.to_text()}"

    def compile(self) -> "CompiledSources":
        return CompiledSources.from_sources(self)


def extract_phasing(state: SymbolicBlochState, echo_index: int) -> PhasingSources:
    """Slowly varying (v0, w0) at the emission time (echo_index + 1) tau.

    The state is evolved forward to the emission time; v0 is the coefficient
    of cos(Delta (t - t_e)) in v and w0 the harmonic-zero part of w.
    """
    if echo_index < 0:
        raise ValueError("echo_index must be >= 0")
    t_e = echo_index + 1
    if t_e < state.time or (state.labels and t_e <= label_index(state.labels[-1])):
        raise ValueError(
            f"echo {echo_index} (t={t_e} tau) is not after the last pulse "
            f"{state.labels[-1] if state.labels else None!r}"
        )
    s = symbolic_free_evolve(state, t_e - state.time)
    return PhasingSources(
        s.v.get(("cos", 0), ZERO),
        s.w.get(("cos", 0), ZERO),
        echo_index,
        state.labels,
    )


@lru_cache(maxsize=None)
def phasing_sources(echo_index: int, n_pulses: int | None = None) -> PhasingSources:
    """Sources for echo ``echo_index`` driven by all earlier pulses.

    By default the driving sequence is every pulse emitted before the echo:
    '1', '2', 'e1', ..., 'e{k-1}'. ``echo_index=0`` gives the sources seen by
    the second input pulse.
    """
    if n_pulses is None:
        n_pulses = echo_index + 1
    return extract_phasing(pulse_sequence(n_pulses), echo_index)


def evaluate_sources(src: PhasingSources, areas: Mapping[str, float],
                     gamma_tau: float) -> tuple[float, float]:
    if not 0 < gamma_tau <= 1:
        raise ValueError(f"gamma_tau must be in (0, 1], got {gamma_tau}")
    missing = (src.v0_expr.labels() | src.w0_expr.labels()) - set(areas)
    if missing:
        raise KeyError(f"missing pulse areas for {sorted(missing, key=label_index)}")
    return src.v0_expr.evaluate(areas, gamma_tau), src.w0_expr.evaluate(areas, gamma_tau)


@dataclass(frozen=True)
class CompiledSources:
    """Array form of (v0, w0) for fast repeated evaluation.

    ``codes[t, j]`` is 0, 1, 2 for the factor 1, cos, sin of pulse j.
    """

    n_labels: int
    v_coef: np.ndarray
    v_gpow: np.ndarray
    v_codes: np.ndarray
    w_coef: np.ndarray
    w_gpow: np.ndarray
    w_codes: np.ndarray

    @classmethod
    def from_sources(cls, src: PhasingSources) -> "CompiledSources":
        n = len(src.labels)

        def pack(poly: TrigPoly):
            items = list(poly.items())
            coef = np.array([float(c) for _, c in items], dtype=float)
            gpow = np.array([p for (p, _), _ in items], dtype=int)
            codes = np.zeros((len(items), n), dtype=np.intp)
            for t, ((_, f), _) in enumerate(items):
                for lab, code in f:
                    codes[t, label_index(lab)] = 1 if code == _COS else 2
            return coef, gpow, codes

        return cls(n, *pack(src.v0_expr), *pack(src.w0_expr))

    def __call__(self, thetas, gamma_tau: float) -> tuple[float, float]:
        th = np.asarray(thetas, dtype=float)[: self.n_labels]
        table = np.stack([np.ones_like(th), np.cos(th), np.sin(th)], axis=1)
        idx = np.arange(self.n_labels)

        def ev(coef, gpow, codes):
            if coef.size == 0:
                return 0.0
            vals = np.prod(table[idx, codes], axis=1) if self.n_labels else np.ones(len(coef))
            return float(np.dot(coef * gamma_tau**gpow, vals))

        return ev(self.v_coef, self.v_gpow, self.v_codes), ev(self.w_coef, self.w_gpow, self.w_codes)
