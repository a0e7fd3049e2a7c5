"""Slice charts for the residual rotation action on an isotropy stratum.

The slice through ``q`` is the affine hyperplane ``q + {v : <v, E(q)> = 0}``
with ``E(q)`` the rotation generator at ``q``. Since SO(2) is abelian and acts
unitarily, the orbit space of a stratum is modelled directly by slice
representatives, and the vertical space at any point is spanned by one vector.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .spectral import (BasisTable, GradedField, check_field, format_snapshot,
                       inner_product, jacobi_lie_bracket, norm, parse_snapshot)
from .symmetry import (DEFAULT_ISOTROPY_TOL, Subgroup, active_modes,
                       classify_isotropy, generator, rotate)

DEFAULT_NEWTON_ITERS = 50
DEFAULT_NEWTON_TOL = 1e-12
MIN_SLOPE = 1e-10
DEFAULT_PIVOT_TOL = 1e-8
CANONICAL_ID = "canonical"


class ChartDomainError(RuntimeError):
    """The slice equation has no locally unique solution for this field."""


class DegenerateGeneratorError(ValueError):
    """The rotation generator vanishes, so there is no vertical direction."""


class UnstableChartError(RuntimeError):
    """The pivot coefficient of the canonical section is too small to fix a phase."""


def _period(H: Subgroup) -> float:
    """Length of the residual angle circle ``SO(2) / H``."""
    return 2.0 * math.pi / (H.n if H.kind == "cyclic" else 1)


def field_hash(u: GradedField) -> str:
    return hashlib.sha256(format_snapshot(u).encode()).hexdigest()[:16]


def unit_generator(basis: BasisTable, q: GradedField, rel_tol: float = 1e-12) -> tuple[GradedField, float]:
    """``(E(q) / ||E(q)||, ||E(q)||)``; raises when ``E(q)`` is negligible against ``q``."""
    E = generator(basis, q, 1.0)
    e = norm(basis, E)
    if e == 0.0 or e <= rel_tol * norm(basis, q):
        raise DegenerateGeneratorError("generator vanishes: field is rotation invariant")
    return E * (1.0 / e), e


@dataclass(frozen=True, eq=False)
class SliceChart:
    """Local model of the orbit space around ``base`` (isotropy ``H``)."""

    basis: BasisTable
    base: GradedField
    H: Subgroup
    E_hat: GradedField
    E_norm: float
    max_iters: int = DEFAULT_NEWTON_ITERS
    tol: float = DEFAULT_NEWTON_TOL
    trust_region: float = math.pi

    @property
    def chart_id(self) -> str:
        return field_hash(self.base)


def make_chart(basis: BasisTable, q: GradedField, H: Subgroup | None = None,
               max_iters: int = DEFAULT_NEWTON_ITERS, tol: float = DEFAULT_NEWTON_TOL,
               trust_region: float | None = None,
               isotropy_tol: float = DEFAULT_ISOTROPY_TOL) -> SliceChart:
    check_field(basis, q)
    H = classify_isotropy(basis, q, isotropy_tol) if H is None else H
    if H.kind == "so2":
        raise DegenerateGeneratorError("no slice chart at a rotation-invariant field")
    E_hat, e = unit_generator(basis, q)
    trust = 0.5 * _period(H) if trust_region is None else float(trust_region)
    return SliceChart(basis, q, H, E_hat, e, max_iters, tol, trust)


@dataclass(frozen=True, eq=False)
class ReducedPoint:
    """Slice representative of an orbit.

    ``angle`` is the rotation that was applied to the input to reach ``rep``.
    ``fixed`` marks rotation-invariant fields, whose orbit is the field itself.
    """

    rep: GradedField
    subgroup: Subgroup
    angle: float = 0.0
    chart_id: str = CANONICAL_ID
    fixed: bool = False

    def to_snapshot(self) -> str:
        return format_snapshot(self.rep, [f"# chart base={self.chart_id} H={self.subgroup}"])

    @classmethod
    def from_snapshot(cls, text: str) -> "ReducedPoint":
        rep, extra = parse_snapshot(text)
        for line in extra:
            parts = line.lstrip("#").split()
            if parts and parts[0] == "chart":
                kv = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
                H = Subgroup.parse(kv.get("H", "trivial"))
                return cls(rep, H, 0.0, kv.get("base", CANONICAL_ID), H.kind == "so2")
        raise ValueError("snapshot has no chart line")


# ---------------------------------------------------------------------------
# slice equation

def s_map(chart: SliceChart, alpha: float, r: GradedField) -> float:
    """``<rotate(r, alpha) - q, E_hat>``, which equals ``<rotate(r, alpha), E_hat>``."""
    return inner_product(chart.basis, rotate(chart.basis, r, alpha), chart.E_hat)


def s_map_derivative(chart: SliceChart, alpha: float, r: GradedField) -> float:
    return inner_product(chart.basis, generator(chart.basis, rotate(chart.basis, r, alpha)), chart.E_hat)


def _bracket(chart: SliceChart, r: GradedField, f0: float) -> tuple[float, float]:
    """Walk away from 0 until ``s`` crosses upward; returns ``(lo, hi)`` with ``s(lo) < 0 < s(hi)``.

    The walk heads right when ``s(0) < 0`` and left otherwise, in steps short
    enough to resolve the fastest angular mode.
    """
    h = min(chart.trust_region, math.pi / (4 * max(chart.basis.M_max, 1)))
    direction = 1.0 if f0 < 0 else -1.0
    a, fa = 0.0, f0
    while abs(a) < chart.trust_region:
        b = direction * min(abs(a) + h, chart.trust_region)
        fb = s_map(chart, b, r)
        if direction > 0 and fa < 0 <= fb:
            return a, b
        if direction < 0 and fb <= 0 < fa:
            return b, a
        a, fa = b, fb
    raise ChartDomainError("no slice crossing inside the chart window")


def solve_beta(chart: SliceChart, r: GradedField) -> float:
    """Angle ``beta`` putting ``rotate(r, beta)`` on the slice.

    The root is first bracketed next to ``alpha = 0`` and then polished by Newton
    steps (clipped to the trust region), with bisection whenever a step leaves
    the bracket. The residual tolerance is ``chart.tol * max(1, ||r||)``.
    """
    check_field(chart.basis, r)
    scale = max(1.0, norm(chart.basis, r))
    f0 = s_map(chart, 0.0, r)
    if abs(f0) <= chart.tol * scale:
        return 0.0
    lo, hi = _bracket(chart, r, f0)
    alpha = 0.5 * (lo + hi)
    for _ in range(chart.max_iters):
        f = s_map(chart, alpha, r)
        if abs(f) <= chart.tol * scale:
            break
        if f < 0:
            lo = alpha
        else:
            hi = alpha
        d = s_map_derivative(chart, alpha, r)
        step = -f / d if d > MIN_SLOPE * scale else math.inf
        step = max(-chart.trust_region, min(chart.trust_region, step))
        nxt = alpha + step
        alpha = nxt if lo < nxt < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-15:
            break
    else:
        raise ChartDomainError(f"slice solve did not converge in {chart.max_iters} iterations")
    if s_map_derivative(chart, alpha, r) < MIN_SLOPE * scale:
        raise ChartDomainError("slice equation is degenerate at the solution")
    return alpha


def chart_B(chart: SliceChart, r: GradedField) -> ReducedPoint:
    beta = solve_beta(chart, r)
    return ReducedPoint(rotate(chart.basis, r, beta), chart.H, beta, chart.chart_id)


# ---------------------------------------------------------------------------
# vertical / horizontal splitting

def _unit_at(basis: BasisTable, at) -> GradedField:
    if isinstance(at, SliceChart):
        return at.E_hat
    if isinstance(at, ReducedPoint):
        at = at.rep
    return unit_generator(basis, at)[0]


def _split(basis: BasisTable, e: GradedField, v: GradedField) -> tuple[GradedField, GradedField]:
    ver = e.with_coeffs(inner_product(basis, v, e) * e.coeffs, v.grade)
    return ver, v - ver


def ver_hor(basis: BasisTable, at, v: GradedField) -> tuple[GradedField, GradedField]:
    """Split ``v`` into its orbit-tangent part and the orthogonal remainder at ``at``.

    ``at`` is a chart (split at its base), a reduced point (split at its
    representative) or a field.
    """
    return _split(basis, _unit_at(basis, at), v)


def horizontal_lift(basis: BasisTable, at, w: GradedField) -> GradedField:
    return ver_hor(basis, at, w)[1]


def reduced_metric(basis: BasisTable, at, xi: GradedField, eta: GradedField) -> float:
    e = _unit_at(basis, at)
    return inner_product(basis, _split(basis, e, xi)[1], _split(basis, e, eta)[1])


def reduced_bracket_vectors(basis: BasisTable, at, xi: GradedField, eta: GradedField) -> GradedField:
    """Bracket of the horizontal lifts, pushed back to the slice by the horizontal projection."""
    e = _unit_at(basis, at)
    hx = _split(basis, e, xi)[1]
    he = _split(basis, e, eta)[1]
    return _split(basis, e, jacobi_lie_bracket(basis, hx, he))[1]


def chart_pushforward(basis: BasisTable, rep: GradedField, w: GradedField, eps: float = 1e-6) -> GradedField:
    """Central difference of ``r -> chart_B(chart_at_rep, r).rep`` along ``w``."""
    chart = make_chart(basis, rep, H=Subgroup.trivial())
    plus = chart_B(chart, rep + w * eps).rep
    minus = chart_B(chart, rep - w * eps).rep
    return (plus - minus) * (0.5 / eps)


# ---------------------------------------------------------------------------
# canonical section

def canonicalize(basis: BasisTable, u: GradedField, H: Subgroup | None = None,
                 tol: float = DEFAULT_ISOTROPY_TOL, pivot_tol: float = DEFAULT_PIVOT_TOL) -> ReducedPoint:
    """Rotate ``u`` so its pivot coefficient is real and positive.

    The pivot is the lowest ``(m, k)`` with ``m > 0`` among the active modes. The
    ``m_p / n`` rotations that achieve this give different fields when the pivot
    wavenumber exceeds the isotropy order ``n``; the first active mode whose
    wavenumber is not a multiple of ``m_p`` then picks the candidate with the
    largest real part of its unit-normalised coefficient. The applied angle is
    the smallest non-negative one modulo ``2 pi / n``.
    """
    check_field(basis, u)
    H = classify_isotropy(basis, u, tol) if H is None else H
    if H.kind == "so2":
        return ReducedPoint(u, H, 0.0, CANONICAL_ID, fixed=True)
    modes = active_modes(basis, u, tol)
    if not modes:
        raise UnstableChartError("no active non-axisymmetric mode")
    M = basis.M_max
    mp, kp = modes[0]
    cp = u.coeffs[M + mp, kp - 1]
    if abs(cp) < pivot_tol * norm(basis, u):
        raise UnstableChartError(f"pivot ({mp},{kp}) magnitude {abs(cp):.3e} below tolerance")
    n = H.n if H.kind == "cyclic" else 1
    period = 2.0 * math.pi / n
    base = math.atan2(cp.imag, cp.real) / mp
    count = max(1, mp // n)
    cands = base + 2.0 * math.pi * np.arange(count) / mp
    if count > 1:
        cands = _break_ties(u, M, modes, mp, cands)
    alpha = float(cands[0]) % period
    if period - alpha < 1e-12:
        alpha = 0.0
    return ReducedPoint(rotate(basis, u, alpha), H, alpha, CANONICAL_ID)


def _break_ties(u: GradedField, M: int, modes, mp: int, cands: np.ndarray) -> np.ndarray:
    for m, k in modes:
        if m % mp == 0 or len(cands) == 1:
            continue
        c = u.coeffs[M + m, k - 1]
        score = np.real(np.exp(-1j * m * cands) * c / abs(c))
        keep = score >= score.max() - 1e-9
        cands = cands[keep]
    return cands[:1]
