"""SO(2) acting on disc fields by rigid rotation, and its isotropy strata.

The action is diagonal in the Fourier-Bessel basis: rotating a field by
``alpha`` multiplies ``c[m, k]`` by ``exp(-i m alpha)``. Closed subgroups are
the trivial group, the cyclic groups ``Z_n`` and the whole circle.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .spectral import (BasisTable, GradedField, GridField, Kinematics, analyze,
                       check_field, inner_product, kinematics, norm, sobolev_norm,
                       synthesize)

DEFAULT_ISOTROPY_TOL = 1e-10
KILLING_RESIDUAL_TOL = 1e-6


class TruncationWarning(UserWarning):
    """A closed-form field is only approximately represented by the basis."""


@dataclass(frozen=True)
class GroupElement:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.angle + other.angle)

    def inverse(self) -> "GroupElement":
        return GroupElement(-self.angle)


@dataclass(frozen=True)
class Subgroup:
    """Closed subgroup of SO(2): ``kind`` is ``"trivial"``, ``"cyclic"`` or ``"so2"``."""

    kind: str
    n: int = 1

    def __post_init__(self):
        if self.kind not in ("trivial", "cyclic", "so2"):
            raise ValueError(f"unknown subgroup kind {self.kind!r}")
        if self.kind == "cyclic" and self.n < 2:
            raise ValueError("cyclic subgroups need n >= 2; use Subgroup.trivial()")
        if self.kind != "cyclic" and self.n != 1:
            object.__setattr__(self, "n", 1)

    @classmethod
    def trivial(cls) -> "Subgroup":
        return cls("trivial")

    @classmethod
    def cyclic(cls, n: int) -> "Subgroup":
        return cls.trivial() if n == 1 else cls("cyclic", int(n))

    @classmethod
    def full(cls) -> "Subgroup":
        return cls("so2")

    @property
    def order(self) -> int:
        """Number of elements, ``0`` standing in for the continuum."""
        return 0 if self.kind == "so2" else self.n

    def contains_cyclic(self, n: int) -> bool:
        if self.kind == "so2" or n == 1:
            return True
        return self.kind == "cyclic" and self.n % n == 0

    def keeps_mode(self, m: int) -> bool:
        if self.kind == "so2":
            return m == 0
        return m % self.n == 0

    def __str__(self) -> str:
        if self.kind == "cyclic":
            return f"cyclic:{self.n}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Subgroup":
        text = text.strip().lower()
        if text == "trivial":
            return cls.trivial()
        if text == "so2":
            return cls.full()
        if text.startswith("cyclic:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError as exc:
                raise ValueError(f"bad subgroup {text!r}") from exc
            if n < 2:
                raise ValueError(f"bad subgroup {text!r}: n must be >= 2")
            return cls.cyclic(n)
        raise ValueError(f"bad subgroup {text!r}")


def _angle(g) -> float:
    return g.angle if isinstance(g, GroupElement) else float(g)


def rotate(basis: BasisTable, u: GradedField, g) -> GradedField:
    """Push ``u`` forward by the rotation ``g`` (a :class:`GroupElement` or an angle)."""
    check_field(basis, u)
    alpha = _angle(g)
    if alpha == 0.0:
        return u
    phase = np.exp(-1j * basis.m_values * alpha)
    return u.with_coeffs(phase[:, None] * u.coeffs)


@dataclass(frozen=True)
class RigidRotation:
    """Closed-form Killing field ``xi * (-y, x)``, usable wherever grid kinematics are needed."""

    xi: float = 1.0
    grade: float = math.inf

    def kinematics(self, basis: BasisTable) -> Kinematics:
        r = basis.r_nodes[:, None]
        th = basis.theta[None, :]
        x = r * np.cos(th)
        y = r * np.sin(th)
        grad = np.zeros((2, 2) + x.shape)
        grad[0, 1] = -self.xi
        grad[1, 0] = self.xi
        return Kinematics(self.xi * np.stack([-y, x]), grad)


def killing_field(basis: BasisTable, xi: float, grade: float = 0.0) -> GradedField:
    """Rigid rotation ``xi * (-y, x)`` projected onto the basis (``m = 0`` modes only).

    Its stream function ``xi (r^2 - 1) / 2`` has an infinite Bessel series, so a
    :class:`TruncationWarning` is issued when the relative grid residual of the
    projection exceeds ``1e-6``.
    """
    exact = GridField(RigidRotation(xi).kinematics(basis).velocity)
    z = analyze(basis, exact, grade)
    c = np.zeros_like(z.coeffs)
    c[basis.M_max] = z.coeffs[basis.M_max].real
    z = z.with_coeffs(c)
    if xi != 0.0:
        resid = synthesize(basis, z).values - exact.values
        w = basis.area_weights
        rel = math.sqrt(np.sum(w * (resid**2).sum(0)) / np.sum(w * (exact.values**2).sum(0)))
        if rel > KILLING_RESIDUAL_TOL:
            warnings.warn(f"rigid rotation truncated: relative residual {rel:.2e}",
                          TruncationWarning, stacklevel=2)
    return z


def generator(basis: BasisTable, u: GradedField, xi: float = 1.0) -> GradedField:
    """Infinitesimal generator ``[u, X_xi]``: coefficients ``-i m xi c``, one grade lower."""
    check_field(basis, u)
    return u.with_coeffs(-1j * xi * basis.m_values[:, None] * u.coeffs, u.grade - 1)


def active_modes(basis: BasisTable, u: GradedField, tol: float = DEFAULT_ISOTROPY_TOL) -> list[tuple[int, int]]:
    """``(m, k)`` with ``m > 0`` whose coefficient exceeds ``tol * ||u||``."""
    scale = norm(basis, u)
    if scale == 0.0:
        return []
    M = basis.M_max
    mags = np.abs(u.coeffs[M + 1:])
    idx = np.argwhere(mags > tol * scale)
    return sorted((int(i) + 1, int(j) + 1) for i, j in idx)


def classify_isotropy(basis: BasisTable, u: GradedField, tol: float = DEFAULT_ISOTROPY_TOL) -> Subgroup:
    """Isotropy subgroup of ``u``: the gcd of its active angular wavenumbers."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    ms = {m for m, _ in active_modes(basis, u, tol)}
    if not ms:
        return Subgroup.full()
    return Subgroup.cyclic(reduce(math.gcd, ms))


def fixed_point_project(basis: BasisTable, u: GradedField, H: Subgroup) -> GradedField:
    """Orthogonal projection onto the ``H``-fixed fields (a mode mask)."""
    check_field(basis, u)
    keep = np.array([H.keeps_mode(int(m)) for m in basis.m_values])
    return u.with_coeffs(np.where(keep[:, None], u.coeffs, 0.0))


def symmetry_defect(basis: BasisTable, u: GradedField, n: int) -> float:
    """``||u - rotate(u, 2 pi / n)|| / ||u||``; zero iff ``Z_n`` fixes ``u``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 0.0
    d = u - rotate(basis, u, 2.0 * math.pi / n)
    return norm(basis, d) / max(norm(basis, u), np.finfo(float).eps)


@dataclass
class C1Report:
    epsilons: np.ndarray
    residuals: np.ndarray
    order: float
    grade: float

    @property
    def converges(self) -> bool:
        return bool(np.all(self.residuals == 0.0)) or self.order >= 0.9


def fit_order(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    good = err > 0
    if good.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[good]), np.log(err[good]), 1)[0])


def check_c1_hypothesis(basis: BasisTable, u: GradedField, s: float | None = None,
                        epsilons=(1e-2, 1e-3, 1e-4, 1e-5)) -> C1Report:
    """Difference quotients of the orbit map measured in the grade ``s - 1`` norm."""
    s = u.grade if s is None else s
    low = max(s - 1.0, 0.0)
    gen = generator(basis, u, 1.0)
    eps = np.asarray(epsilons, dtype=float)
    res = np.empty_like(eps)
    for i, e in enumerate(eps):
        quotient = (rotate(basis, u, e) - u) * (1.0 / e)
        res[i] = sobolev_norm(basis, quotient - gen, low)
    order = 0.0 if np.all(res == 0.0) else fit_order(eps, res)
    return C1Report(eps, res, order, low)


def rotation_scan(basis: BasisTable, u: GradedField, tol: float = DEFAULT_ISOTROPY_TOL) -> Subgroup:
    """Brute-force isotropy: largest ``n <= M_max`` with ``rotate(u, 2 pi / n) = u``.

    Independent of the gcd rule in :func:`classify_isotropy`; used as its oracle.
    """
    if norm(basis, u) == 0.0 or symmetry_defect(basis, u, basis.M_max + 1) < tol:
        return Subgroup.full()
    best = 1
    for n in range(2, basis.M_max + 1):
        if symmetry_defect(basis, u, n) < tol:
            best = n
    return Subgroup.cyclic(best) if best > 1 else Subgroup.trivial()
