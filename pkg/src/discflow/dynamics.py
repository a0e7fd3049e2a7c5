"""Euler dynamics on the disc as a Lie-Poisson system, plus the reduced flow.

The semi-discrete equation is ``du/dt = -P(grad_u u)`` with ``P`` the Galerkin
projection onto the truncated stream basis. Observables are linear or
mode-diagonal quadratic functionals whose gradients are exact.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import (BasisTable, GradedField, analyze_values, check_field,
                       coeff_kinematics, divergence, inner_product, norm,
                       _advect_kin, jacobi_lie_bracket, kinematics)
from .symmetry import (Subgroup, TruncationWarning, fixed_point_project,
                       killing_field, rotate, symmetry_defect)
from .slices import (CANONICAL_ID, ChartDomainError, DegenerateGeneratorError,
                     ReducedPoint, UnstableChartError, _split, canonicalize,
                     reduced_bracket_vectors, unit_generator)

SCHEMES = ("rk4", "midpoint")
CFL_LIMIT = 2.8
DIAGNOSTIC_COLUMNS = ("t", "energy", "enstrophy", "angular_momentum", "div_residual",
                      "defect_n2", "defect_n3", "defect_n4", "tail_fraction")


class BlowUpError(FloatingPointError):
    """Non-finite state; carries the step index and the partial trajectory."""

    def __init__(self, step: int, trajectory: "Trajectory | None" = None):
        super().__init__(f"non-finite state at step {step}")
        self.step = step
        self.trajectory = trajectory


class CFLWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# observables

@dataclass(frozen=True, eq=False)
class Observable:
    """``kind`` is ``"linear"`` (``<a, u>``), ``"quadratic"`` (``0.5 <u, A u>``) or ``"energy"``.

    Quadratic weights form a real array shaped like the coefficients, symmetric
    under ``m -> -m``, so ``A`` is self-adjoint and commutes with rotations.
    """

    kind: str
    a: GradedField | None = None
    weights: np.ndarray | None = None

    @classmethod
    def linear(cls, a: GradedField) -> "Observable":
        return cls("linear", a=a)

    @classmethod
    def quadratic(cls, weights) -> "Observable":
        w = np.asarray(weights, dtype=float)
        if not np.allclose(w, w[::-1], rtol=0, atol=0):
            raise ValueError("quadratic weights must be symmetric under m -> -m")
        return cls("quadratic", weights=w)

    @classmethod
    def energy(cls) -> "Observable":
        return cls("energy")

    def value(self, basis: BasisTable, u: GradedField) -> float:
        if self.kind == "linear":
            return inner_product(basis, self.a, u)
        return 0.5 * inner_product(basis, u, self.derivative(basis, u))

    def derivative(self, basis: BasisTable, u: GradedField) -> GradedField:
        check_field(basis, u)
        if self.kind == "linear":
            return self.a
        if self.kind == "energy":
            return u
        return u.with_coeffs(self.weights * u.coeffs)

    def product_derivative(self, other: "Observable", basis: BasisTable, u: GradedField) -> GradedField:
        """Gradient of the product ``f * g`` by the Leibniz rule."""
        return (self.derivative(basis, u) * other.value(basis, u)
                + other.derivative(basis, u) * self.value(basis, u))


def random_quadratic(basis: BasisTable, rng: np.random.Generator) -> Observable:
    """Quadratic observable with i.i.d. normal weights per ``(|m|, k)``."""
    half = rng.standard_normal((basis.M_max + 1, basis.K_max))
    return Observable.quadratic(half[np.abs(basis.m_values)])


def directional_derivative_error(basis: BasisTable, f: Observable, u: GradedField,
                                 v: GradedField, eps: float) -> float:
    """``|(f(u + eps v) - f(u - eps v)) / (2 eps) - <df(u), v>|``."""
    fd = (f.value(basis, u + v * eps) - f.value(basis, u - v * eps)) / (2 * eps)
    return abs(fd - inner_product(basis, f.derivative(basis, u), v))


# ---------------------------------------------------------------------------
# brackets and vector fields

def lie_poisson_bracket(basis: BasisTable, f: Observable, g: Observable, u: GradedField) -> float:
    """``{f, g}(u) = <u, [dg(u), df(u)]>``."""
    return inner_product(basis, u, jacobi_lie_bracket(basis, g.derivative(basis, u),
                                                      f.derivative(basis, u)))


def restricted_bracket(basis: BasisTable, f: Observable, g: Observable, u: GradedField,
                       H: Subgroup) -> float:
    """Bracket on the ``H``-fixed subspace: derivatives and bracket projected onto it."""
    df = fixed_point_project(basis, f.derivative(basis, u), H)
    dg = fixed_point_project(basis, g.derivative(basis, u), H)
    return inner_product(basis, u, fixed_point_project(basis, jacobi_lie_bracket(basis, dg, df), H))


def _euler_rhs(basis: BasisTable, c: np.ndarray) -> np.ndarray:
    kin = coeff_kinematics(basis, c)
    return -analyze_values(basis, _advect_kin(kin, kin))


def hamiltonian_vector_field(basis: BasisTable, h: Observable, u: GradedField) -> GradedField:
    """``X_h(u) = -P(grad_{dh} u + (grad dh)^T u)``; for the energy ``-P(grad_u u)``."""
    check_field(basis, u)
    if h.kind == "energy":
        return GradedField(_euler_rhs(basis, u.coeffs), u.grade - 1)
    dh = h.derivative(basis, u)
    ku = kinematics(basis, u)
    kd = kinematics(basis, dh)
    transpose = np.einsum("jirt,jrt->irt", kd.grad, ku.velocity)
    w = _advect_kin(kd, ku) + transpose
    return GradedField(-analyze_values(basis, w), u.grade - 1)


# ---------------------------------------------------------------------------
# time stepping

def _rk4(rhs, c: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(c)
    k2 = rhs(c + 0.5 * dt * k1)
    k3 = rhs(c + 0.5 * dt * k2)
    k4 = rhs(c + dt * k3)
    return c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _midpoint(rhs, c: np.ndarray, dt: float) -> np.ndarray:
    return c + dt * rhs(c + 0.5 * dt * rhs(c))


_STEPPERS = {"rk4": _rk4, "midpoint": _midpoint}


def cfl_number(basis: BasisTable, u: GradedField, dt: float) -> float:
    """``dt * max|u| * j_max``, a rough stability indicator for explicit steps."""
    speed = np.sqrt((kinematics(basis, u).velocity ** 2).sum(0)).max()
    return float(dt * speed * basis.zeros.max())


def step(basis: BasisTable, u: GradedField, dt: float, scheme: str = "rk4",
         rhs=None, index: int = 0) -> GradedField:
    """One explicit step of ``du/dt = rhs(u)`` (Euler by default)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if scheme not in _STEPPERS:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    check_field(basis, u)
    if cfl_number(basis, u, dt) > CFL_LIMIT:
        warnings.warn(f"dt={dt:g} exceeds the explicit stability estimate", CFLWarning, stacklevel=2)
    f = (lambda c: _euler_rhs(basis, c)) if rhs is None else rhs
    with np.errstate(over="ignore", invalid="ignore"):
        out = _STEPPERS[scheme](f, u.coeffs, dt)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(index)
    return GradedField(0.5 * (out + np.conj(out[::-1])), u.grade)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    status: str = "ok"

    def append(self, t: float, state, record: dict | None = None):
        if self.times and t <= self.times[-1]:
            raise ValueError("trajectory times must increase")
        self.times.append(float(t))
        self.states.append(state)
        if record is not None:
            self.diagnostics.append(record)


def time_grid(dt: float, T: float) -> list[float]:
    """Step end times ``dt, 2 dt, ...``; the last step is shortened to land on ``T``."""
    if dt <= 0 or T < 0:
        raise ValueError("need dt > 0 and T >= 0")
    n = math.ceil(T / dt - 1e-9)
    return [min((i + 1) * dt, T) for i in range(n)]


def flow(basis: BasisTable, u0: GradedField, dt: float, T: float, scheme: str = "rk4",
         record: bool = True, rhs=None) -> Trajectory:
    """Integrate from ``t = 0`` to ``T``; every step is stored with its diagnostics."""
    traj = Trajectory()
    diag = DiagnosticsEvaluator(basis) if record else None
    traj.append(0.0, u0, diag(u0, 0.0) if record else None)
    u, t = u0, 0.0
    for i, t_next in enumerate(time_grid(dt, T)):
        try:
            u = step(basis, u, t_next - t, scheme, rhs=rhs, index=i + 1)
        except BlowUpError as exc:
            traj.status = "blowup"
            exc.trajectory = traj
            raise
        t = t_next
        traj.append(t, u, diag(u, t) if record else None)
    return traj


# ---------------------------------------------------------------------------
# diagnostics

class DiagnosticsEvaluator:
    """Caches the projected Killing field so per-step diagnostics stay cheap."""

    def __init__(self, basis: BasisTable):
        self.basis = basis
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            self.killing = killing_field(basis, 1.0)

    def __call__(self, u: GradedField, t: float = 0.0) -> dict:
        b = self.basis
        lam = b.lam
        mag2 = np.abs(u.coeffs) ** 2
        energy = 0.5 * float(np.sum(lam * mag2))
        shell = np.zeros(b.coeff_shape, dtype=bool)
        shell[:, -1] = True
        shell[0] = shell[-1] = True
        tail = float(np.sum((lam * mag2)[shell])) / (2 * energy) if energy > 0 else 0.0
        div = divergence(kinematics(b, u))
        rec = {
            "t": float(t),
            "energy": energy,
            "enstrophy": 0.5 * float(np.sum(lam**2 * mag2)),
            "angular_momentum": inner_product(b, u, self.killing),
            "div_residual": float(np.max(np.abs(div))),
        }
        for n in (2, 3, 4):
            rec[f"defect_n{n}"] = symmetry_defect(b, u, n) if energy > 0 else 0.0
        rec["tail_fraction"] = tail
        return rec


def diagnostics(basis: BasisTable, u: GradedField, t: float = 0.0) -> dict:
    return DiagnosticsEvaluator(basis)(u, t)


def diagnostics_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAGNOSTIC_COLUMNS)
    for rec in records:
        w.writerow([repr(float(rec[c])) for c in DIAGNOSTIC_COLUMNS])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# reduced dynamics

def reduced_rhs(basis: BasisTable, omega) -> GradedField:
    """Horizontal part of ``-P(grad_rep rep)`` at the representative."""
    rep = omega.rep if isinstance(omega, ReducedPoint) else omega
    X = hamiltonian_vector_field(basis, Observable.energy(), rep)
    e, _ = unit_generator(basis, rep)
    return _split(basis, e, X)[1]


def pushdown(basis: BasisTable, u: GradedField, X: GradedField) -> GradedField:
    """Tangent map of the canonical section: rotate ``X`` with ``u`` and take the horizontal part."""
    p = canonicalize(basis, u)
    Xr = rotate(basis, X, p.angle)
    e, _ = unit_generator(basis, p.rep)
    return _split(basis, e, Xr)[1]


def _horizontal_rhs(basis: BasisTable):
    def rhs(c: np.ndarray) -> np.ndarray:
        x = _euler_rhs(basis, c)
        m = basis.m_values[:, None]
        E = -1j * m * c
        ee = float(np.sum(basis.lam * np.abs(E) ** 2))
        if ee == 0.0:
            raise DegenerateGeneratorError("generator vanishes along the reduced flow")
        return x - (float(np.sum(basis.lam * np.real(np.conj(E) * x))) / ee) * E
    return rhs


@dataclass
class ReducedTrajectory:
    times: list = field(default_factory=list)
    points: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    status: str = "ok"
    message: str = ""


def reduced_flow(basis: BasisTable, omega0: ReducedPoint, dt: float, T: float,
                 mode: str = "quotient", scheme: str = "rk4") -> ReducedTrajectory:
    """Reduced Euler flow of a canonical point.

    ``quotient`` integrates the full equation and canonicalizes each state;
    ``chart`` integrates the horizontal equation and re-canonicalizes each step.
    A vanishing pivot ends the run with status ``chart_failure``.
    """
    if mode not in ("quotient", "chart"):
        raise ValueError(f"unknown mode {mode!r}")
    H = omega0.subgroup
    out = ReducedTrajectory()
    out.times.append(0.0)
    out.points.append(omega0)
    out.energies.append(0.5 * inner_product(basis, omega0.rep, omega0.rep))
    rhs = None if mode == "quotient" else _horizontal_rhs(basis)
    u = omega0.rep
    t = 0.0
    for i, t_next in enumerate(time_grid(dt, T)):
        try:
            u = step(basis, u, t_next - t, scheme, rhs=rhs, index=i + 1)
            p = canonicalize(basis, u, H)
        except (UnstableChartError, ChartDomainError, DegenerateGeneratorError) as exc:
            out.status, out.message = "chart_failure", str(exc)
            break
        except BlowUpError as exc:
            out.status, out.message = "blowup", str(exc)
            break
        if mode == "chart":
            u = p.rep
        t = t_next
        out.times.append(t)
        out.points.append(p)
        out.energies.append(0.5 * inner_product(basis, p.rep, p.rep))
    return out


def reduced_discrepancy(basis: BasisTable, a: ReducedTrajectory, b: ReducedTrajectory) -> float:
    """``sup_t ||rep_a(t) - rep_b(t)||`` over the common prefix."""
    n = min(len(a.points), len(b.points))
    return max((norm(basis, a.points[i].rep - b.points[i].rep) for i in range(n)), default=0.0)


def reduced_poisson_bracket(basis: BasisTable, f: Observable, g: Observable, omega: ReducedPoint) -> float:
    """``<rep, [[Hor dg, Hor df]]>`` for rotation-invariant ``f``, ``g`` evaluated on the quotient."""
    rep = omega.rep
    return inner_product(basis, rep, reduced_bracket_vectors(
        basis, rep, g.derivative(basis, rep), f.derivative(basis, rep)))


# ---------------------------------------------------------------------------
# Poisson property of the flow

def real_directions(basis: BasisTable) -> np.ndarray:
    """Real coordinate directions of the coefficient space, stacked ``(n_dof, 2M+1, K)``."""
    M, K = basis.M_max, basis.K_max
    dirs = []
    for k in range(K):
        e = np.zeros(basis.coeff_shape, dtype=complex)
        e[M, k] = 1.0
        dirs.append(e)
    for m in range(1, M + 1):
        for k in range(K):
            for z in (1.0, 1j):
                e = np.zeros(basis.coeff_shape, dtype=complex)
                e[M + m, k] = z
                e[M - m, k] = np.conj(z)
                dirs.append(e)
    return np.array(dirs)


def _tangent_rhs(basis: BasisTable, c: np.ndarray, dc: np.ndarray) -> np.ndarray:
    kc = coeff_kinematics(basis, c)
    kd = coeff_kinematics(basis, dc)
    kcb = type(kc)(kc.velocity[None], kc.grad[None])
    return -analyze_values(basis, _advect_kin(kcb, kd) + _advect_kin(kd, kcb))


def flow_jacobian(basis: BasisTable, u0: GradedField, dt: float, T: float,
                  directions: np.ndarray | None = None) -> tuple[GradedField, np.ndarray]:
    """Final state and the exact derivative of the rk4 map applied to ``directions``."""
    c = u0.coeffs.copy()
    D = real_directions(basis) if directions is None else directions.copy()
    t = 0.0
    for t_next in time_grid(dt, T):
        h = t_next - t
        k1 = _euler_rhs(basis, c)
        d1 = _tangent_rhs(basis, c, D)
        c2 = c + 0.5 * h * k1
        D2 = D + 0.5 * h * d1
        k2 = _euler_rhs(basis, c2)
        d2 = _tangent_rhs(basis, c2, D2)
        c3 = c + 0.5 * h * k2
        D3 = D + 0.5 * h * d2
        k3 = _euler_rhs(basis, c3)
        d3 = _tangent_rhs(basis, c3, D3)
        c4 = c + h * k3
        D4 = D + h * d3
        k4 = _euler_rhs(basis, c4)
        d4 = _tangent_rhs(basis, c4, D4)
        c = c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        D = D + (h / 6.0) * (d1 + 2 * d2 + 2 * d3 + d4)
        t = t_next
    return GradedField(0.5 * (c + np.conj(c[::-1])), u0.grade), D


def pullback_gradient(basis: BasisTable, f: Observable, uT: GradedField, J: np.ndarray,
                      directions: np.ndarray) -> GradedField:
    """Gradient of ``f o F_t`` at ``u0`` from the Jacobian columns ``J`` along ``directions``."""
    df = f.derivative(basis, uT).coeffs
    pair = np.einsum("mk,mk,dmk->d", basis.lam, np.conj(df), J).real
    gram = np.einsum("mk,dmk->d", basis.lam, np.abs(directions) ** 2)
    c = np.einsum("d,dmk->mk", pair / gram, directions)
    return GradedField(c, uT.grade)


@dataclass
class PoissonFlowReport:
    t: float
    lhs: float
    rhs: float
    discrepancy: float
    scale: float

    @property
    def relative(self) -> float:
        return self.discrepancy / self.scale if self.scale > 0 else self.discrepancy


def poisson_flow_check(basis: BasisTable, f: Observable, g: Observable, u0: GradedField,
                       t: float, dt: float = 1e-3) -> PoissonFlowReport:
    """Compare ``{f o F_t, g o F_t}(u0)`` with ``{f, g}(F_t u0)``.

    Both sides come from exact tangent-linear rk4 Jacobians, so the gap is the
    integrator's departure from a Poisson map. ``relative`` scales it by the
    larger of the two bracket values.
    """
    if t == 0.0:
        v = lie_poisson_bracket(basis, f, g, u0)
        return PoissonFlowReport(0.0, v, v, 0.0, abs(v))
    dirs = real_directions(basis)
    uT, J = flow_jacobian(basis, u0, dt, t, dirs)
    dF = pullback_gradient(basis, f, uT, J, dirs)
    dG = pullback_gradient(basis, g, uT, J, dirs)
    lhs = inner_product(basis, u0, jacobi_lie_bracket(basis, dG, dF))
    rhs = lie_poisson_bracket(basis, f, g, uT)
    scale = max(abs(lhs), abs(rhs))
    return PoissonFlowReport(t, lhs, rhs, abs(lhs - rhs), scale)
