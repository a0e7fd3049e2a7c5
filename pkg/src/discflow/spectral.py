"""Fourier-Bessel stream-function spectra on the unit disc.

A velocity field is stored through its stream function
``psi = sum c[m, k] phi_{m,k}`` with ``phi_{m,k} = N J_|m|(j r) e^{i m theta}``,
the Dirichlet eigenfunctions of the Laplacian normalised to unit L2 norm.
The velocity is ``u = grad_perp psi = (-d_y psi, d_x psi)``, which is
divergence free and tangent to the boundary for every coefficient array.

Nonlinear terms are evaluated on a tensor quadrature grid (Gauss-Legendre in
``r``, uniform in ``theta``) and projected back by the L2 pairing against the
basis velocities; that Galerkin projection doubles as the dealiasing filter
and as the discrete Leray projector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bessel import bessel_zeros, jn_all

REALITY_TOL = 1e-14
SNAPSHOT_TAG = "disc-stream-v1"
SNAPSHOT_REALITY_TOL = 1e-12


class BasisMismatchError(ValueError):
    """Field coefficients do not match the basis resolution."""


class GridShapeError(ValueError):
    """Grid samples do not match the basis quadrature grid."""


class SnapshotFormatError(ValueError):
    """A coefficient snapshot is malformed or violates the reality constraint."""


@dataclass(frozen=True, eq=False)
class BasisTable:
    """Resolved Dirichlet eigenbasis plus the quadrature used for nonlinear terms.

    ``zeros[m, k-1]`` and ``eigenvalues`` are indexed by ``0 <= m <= M_max``;
    negative angular modes reuse the ``|m|`` row. Radial tables have shape
    ``(M_max + 1, K_max, n_r)``.
    """

    M_max: int
    K_max: int
    zeros: np.ndarray
    eigenvalues: np.ndarray
    norm_constants: np.ndarray
    r_nodes: np.ndarray
    r_weights: np.ndarray
    n_theta: int
    radial: np.ndarray = field(repr=False)
    radial_d1: np.ndarray = field(repr=False)
    radial_d2: np.ndarray = field(repr=False)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.M_max, self.M_max + 1)

    @property
    def coeff_shape(self) -> tuple[int, int]:
        return (2 * self.M_max + 1, self.K_max)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return (self.r_nodes.size, self.n_theta)

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def lam(self) -> np.ndarray:
        """Eigenvalues laid out like a coefficient array (rows m = -M..M)."""
        return self.eigenvalues[np.abs(self.m_values)]

    @property
    def area_weights(self) -> np.ndarray:
        """Quadrature weights for ``dA = r dr dtheta`` on the grid."""
        return np.outer(self.r_weights * self.r_nodes,
                        np.full(self.n_theta, 2.0 * np.pi / self.n_theta))

    @cached_property
    def angular(self) -> np.ndarray:
        return np.exp(1j * np.outer(self.m_values, self.theta))

    @cached_property
    def angular_conj(self) -> np.ndarray:
        return np.conj(self.angular) * (2.0 * np.pi / self.n_theta)

    @cached_property
    def signed_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        absm = np.abs(self.m_values)
        return self.radial[absm], self.radial_d1[absm], self.radial_d2[absm]

    @cached_property
    def stacked_radial(self) -> np.ndarray:
        """``(R, R', R'')`` concatenated along the radial axis, shape ``(2M+1, K, 3 n_r)``."""
        return np.concatenate(self.signed_tables, axis=-1)

    @cached_property
    def analysis_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Radial test functions (with ``r dr`` weights) paired with ``w_r`` and ``w_theta``."""
        R, R1, _ = self.signed_tables
        rw = self.r_weights * self.r_nodes
        im = (1j * self.m_values)[:, None, None]
        return im * R / self.r_nodes * rw, R1 * rw

    @cached_property
    def analysis_stacked(self) -> np.ndarray:
        """Both analysis tables stacked along ``r`` and transposed to ``(2M+1, 2 n_r, K)``."""
        Pr, Pt = self.analysis_tables
        return np.swapaxes(np.concatenate([Pr, Pt], axis=-1), -1, -2) / self.lam[:, None, :]

    def mode_index(self, m: int, k: int) -> tuple[int, int]:
        if abs(m) > self.M_max or not 1 <= k <= self.K_max:
            raise BasisMismatchError(f"mode ({m},{k}) outside basis M_max={self.M_max}, K_max={self.K_max}")
        return m + self.M_max, k - 1


def default_radial_nodes(M_max: int, K_max: int) -> int:
    """Radial Gauss-Legendre count that integrates cubic products to round-off.

    The floor ``ceil(3 K pi / 2)`` resolves pairwise products; cubic terms of the
    bracket pairing oscillate about ``3 j_max / (2 pi)`` times on ``[0, 1]``.
    """
    j_max = M_max + K_max * math.pi + 2.0
    return max(math.ceil(3 * K_max * math.pi / 2), math.ceil(0.75 * j_max) + 24)


def default_angular_nodes(M_max: int) -> int:
    return max(4 * M_max + 1, 3 * M_max + 6)


def build_basis(M_max: int, K_max: int, quad_order: int | None = None,
                n_theta: int | None = None) -> BasisTable:
    """Tabulate zeros, normalisations and radial profiles on the quadrature grid.

    ``quad_order`` is the number of radial Gauss-Legendre nodes; ``None`` picks
    :func:`default_radial_nodes`.
    """
    if M_max < 0 or K_max < 1:
        raise ValueError(f"need M_max >= 0 and K_max >= 1, got ({M_max}, {K_max})")
    n_r = default_radial_nodes(M_max, K_max) if quad_order is None else int(quad_order)
    n_r = max(n_r, math.ceil(3 * K_max * math.pi / 2))
    n_t = default_angular_nodes(M_max) if n_theta is None else int(n_theta)
    if n_t < 2 * M_max + 1:
        raise ValueError(f"n_theta={n_t} cannot resolve angular modes up to {M_max}")
    zeros = np.array([bessel_zeros(m, K_max) for m in range(M_max + 1)])
    return _tabulate(M_max, K_max, zeros, n_r, n_t)


def _tabulate(M_max: int, K_max: int, zeros: np.ndarray, n_r: int, n_t: int) -> BasisTable:
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w
    # J_{m+1}(j_{m,k}) fixes the L2 normalisation: int_0^1 J_m(jr)^2 r dr = J_{m+1}(j)^2 / 2
    norms = np.empty_like(zeros)
    for m in range(M_max + 1):
        norms[m] = 1.0 / (math.sqrt(math.pi) * np.abs(jn_all(m + 1, zeros[m])[m + 1]))
    args = zeros[:, :, None] * r[None, None, :]
    radial = np.empty(zeros.shape + (n_r,))
    d1 = np.empty_like(radial)
    d2 = np.empty_like(radial)
    for m in range(M_max + 1):
        vals = jn_all(m + 1, args[m])
        jm = vals[m]
        jp = vals[m - 1] if m > 0 else -vals[1]
        djm = 0.5 * (jp - vals[m + 1]) if m > 0 else -vals[1]
        j = zeros[m][:, None]
        radial[m] = norms[m][:, None] * jm
        d1[m] = norms[m][:, None] * j * djm
        # Bessel ODE: R'' = -R'/r - (j^2 - m^2/r^2) R
        d2[m] = -d1[m] / r - (j**2 - m**2 / r**2) * radial[m]
    return BasisTable(M_max=M_max, K_max=K_max, zeros=zeros, eigenvalues=zeros**2,
                      norm_constants=norms, r_nodes=r, r_weights=wr, n_theta=n_t,
                      radial=radial, radial_d1=d1, radial_d2=d2)


def rebuild_with_zeros(basis: BasisTable, zeros: np.ndarray) -> BasisTable:
    """Re-tabulate ``basis`` around a replacement zero table (used for negative controls)."""
    return _tabulate(basis.M_max, basis.K_max, np.asarray(zeros, dtype=float),
                     basis.r_nodes.size, basis.n_theta)


@dataclass(frozen=True, eq=False)
class GradedField:
    """Stream-function coefficients ``c[m + M_max, k - 1]`` tagged with a Sobolev grade."""

    coeffs: np.ndarray
    grade: float = 0.0
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.real:
            err = reality_defect(c)
            scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
            if err > REALITY_TOL * scale:
                raise ValueError(f"reality constraint violated by {err:.3e}")

    @property
    def M_max(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def K_max(self) -> int:
        return self.coeffs.shape[1]

    def with_coeffs(self, coeffs, grade: float | None = None) -> "GradedField":
        return GradedField(coeffs, self.grade if grade is None else grade, self.real)

    def __add__(self, other: "GradedField") -> "GradedField":
        return GradedField(self.coeffs + other.coeffs, min(self.grade, other.grade), self.real and other.real)

    def __sub__(self, other: "GradedField") -> "GradedField":
        return GradedField(self.coeffs - other.coeffs, min(self.grade, other.grade), self.real and other.real)

    def __mul__(self, scalar: float) -> "GradedField":
        return GradedField(self.coeffs * scalar, self.grade, self.real and np.isrealobj(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GradedField":
        return GradedField(-self.coeffs, self.grade, self.real)


@dataclass(frozen=True, eq=False)
class GridField:
    """Cartesian vector samples ``values[(x, y), i_r, i_theta]`` (or scalar ``values[i_r, i_theta]``)."""

    values: np.ndarray
    grade: float | None = None

    def __add__(self, other: "GridField") -> "GridField":
        return GridField(self.values + other.values, _min_grade(self.grade, other.grade))

    def __sub__(self, other: "GridField") -> "GridField":
        return GridField(self.values - other.values, _min_grade(self.grade, other.grade))

    def __mul__(self, scalar: float) -> "GridField":
        return GridField(self.values * scalar, self.grade)

    __rmul__ = __mul__


def _min_grade(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def reality_defect(coeffs: np.ndarray) -> float:
    """Largest violation of ``c[-m] = conj(c[m])``."""
    if coeffs.size == 0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(coeffs[::-1]))))


def zero_field(basis: BasisTable, grade: float = 0.0) -> GradedField:
    return GradedField(np.zeros(basis.coeff_shape, dtype=complex), grade)


def mode_field(basis: BasisTable, modes, grade: float = 0.0) -> GradedField:
    """Real field from ``{(m, k): c}`` with ``m >= 0``; conjugate partners are filled in."""
    c = np.zeros(basis.coeff_shape, dtype=complex)
    for (m, k), val in dict(modes).items():
        if m < 0:
            raise ValueError("give modes with m >= 0; negative partners are implied")
        i, j = basis.mode_index(m, k)
        if m == 0:
            c[i, j] += val.real
        else:
            c[i, j] += val
            c[basis.mode_index(-m, k)] += np.conj(val)
    return GradedField(c, grade)


def random_field(basis: BasisTable, rng: np.random.Generator, decay: float = 2.0,
                 grade: float = 0.0, m_allowed=None, energy: float | None = None) -> GradedField:
    """Random real field with coefficients damped by ``(1 + lambda)^(-decay / 2)``.

    ``m_allowed`` restricts the support to the listed non-negative angular modes.
    With ``energy`` set the result is rescaled so ``0.5 <u, u>`` equals it.
    """
    c = np.zeros(basis.coeff_shape, dtype=complex)
    M = basis.M_max
    allowed = range(M + 1) if m_allowed is None else [m for m in m_allowed if 0 <= m <= M]
    for m in allowed:
        amp = (1.0 + basis.eigenvalues[m]) ** (-0.5 * decay)
        if m == 0:
            c[M] = rng.standard_normal(basis.K_max) * amp
        else:
            z = (rng.standard_normal(basis.K_max) + 1j * rng.standard_normal(basis.K_max)) * amp
            c[M + m] = z
            c[M - m] = np.conj(z)
    u = GradedField(c, grade)
    if energy is not None:
        e = 0.5 * inner_product(basis, u, u)
        if e > 0:
            u = u * math.sqrt(energy / e)
    return u


def check_field(basis: BasisTable, u: GradedField) -> None:
    if u.coeffs.shape != basis.coeff_shape:
        raise BasisMismatchError(f"coefficients {u.coeffs.shape} vs basis {basis.coeff_shape}")


def inner_product(basis: BasisTable, u: GradedField, v: GradedField) -> float:
    """Velocity L2 pairing ``sum lambda Re(conj(c_u) c_v)`` over all modes."""
    check_field(basis, u)
    check_field(basis, v)
    return float(np.sum(basis.lam * np.real(np.conj(u.coeffs) * v.coeffs)))


def norm(basis: BasisTable, u: GradedField) -> float:
    return math.sqrt(max(inner_product(basis, u, u), 0.0))


def sobolev_norm(basis: BasisTable, u: GradedField, s: float) -> float:
    """``sqrt(sum lambda (1 + lambda)^s |c|^2)``; ``s = 0`` is the L2 velocity norm."""
    if s < 0:
        raise ValueError("Sobolev grade must be non-negative")
    check_field(basis, u)
    lam = basis.lam
    return math.sqrt(float(np.sum(lam * (1.0 + lam) ** s * np.abs(u.coeffs) ** 2)))


def grid_inner(basis: BasisTable, a: GridField, b: GridField) -> float:
    """Quadrature L2 pairing of two grid vector (or scalar) fields."""
    w = basis.area_weights
    prod = a.values * b.values
    if prod.ndim == 3:
        prod = prod.sum(axis=0)
    return float(np.sum(w * prod))


# ---------------------------------------------------------------------------
# grid kinematics

@dataclass(frozen=True)
class Kinematics:
    """Cartesian velocity and its gradient on the grid; ``grad[i, j] = d_j u_i``."""

    velocity: np.ndarray
    grad: np.ndarray


def _synth(basis: BasisTable, prof: np.ndarray) -> np.ndarray:
    """Real grid values from angular profiles ``prof[..., m, r]``."""
    return np.real(np.swapaxes(prof, -1, -2) @ basis.angular)


def _stream_derivatives(basis: BasisTable, coeffs: np.ndarray):
    """psi_r, psi_theta, psi_rr, psi_rtheta, psi_thetatheta on the grid."""
    n_r = basis.r_nodes.size
    prof = (coeffs[..., :, None, :] @ basis.stacked_radial)[..., 0, :]
    A, A1, A2 = prof[..., :n_r], prof[..., n_r:2 * n_r], prof[..., 2 * n_r:]
    im = (1j * basis.m_values)[:, None]
    out = _synth(basis, np.stack([A1, im * A, A2, im * A1, im * im * A]))
    return tuple(out)


def coeff_kinematics(basis: BasisTable, coeffs: np.ndarray) -> Kinematics:
    """Kinematics for a (possibly batched) coefficient array ``coeffs[..., m, k]``."""
    r = basis.r_nodes[:, None]
    cos = np.cos(basis.theta)[None, :]
    sin = np.sin(basis.theta)[None, :]
    p_r, p_t, p_rr, p_rt, p_tt = _stream_derivatives(basis, coeffs)
    ur = -p_t / r
    ut = p_r
    ur_r = -p_rt / r + p_t / r**2
    ur_t = -p_tt / r
    ut_r = p_rr
    ut_t = p_rt
    ux = ur * cos - ut * sin
    uy = ur * sin + ut * cos
    ux_r = ur_r * cos - ut_r * sin
    uy_r = ur_r * sin + ut_r * cos
    ux_t = ur_t * cos - ur * sin - ut_t * sin - ut * cos
    uy_t = ur_t * sin + ur * cos + ut_t * cos - ut * sin
    # d_x = cos d_r - (sin / r) d_theta ; d_y = sin d_r + (cos / r) d_theta
    grad = np.stack([
        np.stack([cos * ux_r - sin / r * ux_t, sin * ux_r + cos / r * ux_t], axis=-3),
        np.stack([cos * uy_r - sin / r * uy_t, sin * uy_r + cos / r * uy_t], axis=-3),
    ], axis=-4)
    return Kinematics(np.stack([ux, uy], axis=-3), grad)


def kinematics(basis: BasisTable, u) -> Kinematics:
    """Grid velocity and gradient for a :class:`GradedField` or any closed-form field.

    Objects other than ``GradedField`` must provide ``kinematics(basis)``.
    """
    if not isinstance(u, GradedField):
        return u.kinematics(basis)
    check_field(basis, u)
    return coeff_kinematics(basis, u.coeffs)


def synthesize(basis: BasisTable, u: GradedField) -> GridField:
    """Evaluate ``u = grad_perp psi`` (Cartesian components) on the quadrature grid."""
    check_field(basis, u)
    r = basis.r_nodes[:, None]
    cos = np.cos(basis.theta)[None, :]
    sin = np.sin(basis.theta)[None, :]
    R, R1, _ = basis.signed_tables
    A = np.einsum("mk,mkr->mr", u.coeffs, R)
    A1 = np.einsum("mk,mkr->mr", u.coeffs, R1)
    ur = -_synth(basis, (1j * basis.m_values)[:, None] * A) / r
    ut = _synth(basis, A1)
    return GridField(np.stack([ur * cos - ut * sin, ur * sin + ut * cos]), u.grade)


def stream_function(basis: BasisTable, u: GradedField) -> np.ndarray:
    """Scalar stream function on the quadrature grid."""
    check_field(basis, u)
    return _synth(basis, np.einsum("mk,mkr->mr", u.coeffs, basis.signed_tables[0]))


def vorticity(basis: BasisTable, u: GradedField) -> np.ndarray:
    """Scalar vorticity ``curl u = Laplacian psi = -sum lambda c phi`` on the grid."""
    return stream_function(basis, u.with_coeffs(-basis.lam * u.coeffs))


def divergence(kin: Kinematics) -> np.ndarray:
    return kin.grad[..., 0, 0, :, :] + kin.grad[..., 1, 1, :, :]


def analyze_values(basis: BasisTable, vals: np.ndarray) -> np.ndarray:
    """Batched Galerkin projection ``vals[..., (x, y), r, theta] -> coeffs[..., m, k]``."""
    cos = np.cos(basis.theta)
    sin = np.sin(basis.theta)
    wx = vals[..., 0, :, :]
    wy = vals[..., 1, :, :]
    wr = wx * cos + wy * sin
    wt = -wx * sin + wy * cos
    f = np.concatenate([wr, wt], axis=-2) @ basis.angular_conj.T
    c = (np.swapaxes(f, -1, -2)[..., :, None, :] @ basis.analysis_stacked)[..., 0, :]
    return 0.5 * (c + np.conj(c[..., ::-1, :]))


def analyze(basis: BasisTable, w: GridField, grade: float | None = None) -> GradedField:
    """Galerkin projection of a grid vector field onto the stream basis.

    ``c[m, k] = <w, grad_perp phi_{m,k}> / lambda_{m,k}``, i.e. the L2-orthogonal
    projection onto the resolved divergence-free, boundary-tangent fields.
    """
    vals = np.asarray(w.values)
    if vals.shape != (2,) + basis.grid_shape:
        raise GridShapeError(f"grid field {vals.shape} vs quadrature {(2,) + basis.grid_shape}")
    if grade is None:
        grade = 0.0 if w.grade is None else w.grade
    return GradedField(analyze_values(basis, vals), grade)


def transform(basis: BasisTable, field, direction: str):
    """``synthesize`` a :class:`GradedField` or ``analyze`` a :class:`GridField`."""
    if direction == "synthesize":
        return synthesize(basis, field)
    if direction == "analyze":
        return analyze(basis, field)
    raise ValueError(f"unknown direction {direction!r}")


def leray_project(basis: BasisTable, w: GridField, grade: float | None = None):
    """Split ``w`` into its resolved divergence-free part and the gradient remainder.

    Returns ``(P_e w, w - P_e w)``; the second component is the pressure-gradient
    part when ``w`` is an advection term.
    """
    proj = analyze(basis, w, grade)
    return proj, GridField(np.asarray(w.values) - synthesize(basis, proj).values, w.grade)


def _advect_kin(a: Kinematics, b: Kinematics) -> np.ndarray:
    """``(a . grad) b`` in Cartesian components."""
    v = a.velocity
    g = b.grad
    return g[..., :, 0, :, :] * v[..., None, 0, :, :] + g[..., :, 1, :, :] * v[..., None, 1, :, :]


def advect(basis: BasisTable, u, v) -> GridField:
    """``(u . grad) v`` sampled on the grid; grade ``min(s_u, s_v) - 1``."""
    ku = kinematics(basis, u)
    kv = kinematics(basis, v)
    return GridField(_advect_kin(ku, kv), _grade_drop(u, v))


def _grade_drop(u, v):
    gu = getattr(u, "grade", None)
    gv = getattr(v, "grade", None)
    g = _min_grade(gu, gv)
    return None if g is None else g - 1


def jacobi_lie_bracket(basis: BasisTable, u, v) -> GradedField:
    """``[u, v] = grad_u v - grad_v u`` projected onto the basis, one grade lower."""
    ku = kinematics(basis, u)
    kv = kinematics(basis, v)
    w = GridField(_advect_kin(ku, kv) - _advect_kin(kv, ku))
    g = _grade_drop(u, v)
    return analyze(basis, w, 0.0 if g is None else g)


# ---------------------------------------------------------------------------
# snapshots

def _snapshot_lines(basis_or_shape, u: GradedField) -> list[str]:
    M, K = u.M_max, u.K_max
    lines = [f"# {SNAPSHOT_TAG} {M} {K} {float(u.grade)!r}"]
    for i, m in enumerate(range(-M, M + 1)):
        for k in range(1, K + 1):
            c = u.coeffs[i, k - 1]
            lines.append(f"{m} {k} {float(c.real)!r} {float(c.imag)!r}")
    return lines


def format_snapshot(u: GradedField, extra_header: list[str] | None = None) -> str:
    lines = _snapshot_lines(None, u)
    if extra_header:
        lines[1:1] = extra_header
    return "\n".join(lines) + "\n"


def parse_snapshot(text: str) -> tuple[GradedField, list[str]]:
    """Parse the text snapshot format; returns the field and any extra ``#`` lines."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise SnapshotFormatError("missing header line")
    head = lines[0].lstrip("#").split()
    if len(head) != 4 or head[0] != SNAPSHOT_TAG:
        raise SnapshotFormatError(f"bad header {lines[0]!r}")
    try:
        M, K, grade = int(head[1]), int(head[2]), float(head[3])
    except ValueError as exc:
        raise SnapshotFormatError(f"bad header {lines[0]!r}") from exc
    extra = [ln for ln in lines[1:] if ln.startswith("#")]
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    expected = [(m, k) for m in range(-M, M + 1) for k in range(1, K + 1)]
    if len(body) != len(expected):
        raise SnapshotFormatError(f"expected {len(expected)} mode lines, got {len(body)}")
    c = np.zeros((2 * M + 1, K), dtype=complex)
    for ln, (m, k) in zip(body, expected):
        parts = ln.split()
        try:
            ok = len(parts) == 4 and (int(parts[0]), int(parts[1])) == (m, k)
            if ok:
                c[m + M, k - 1] = complex(float(parts[2]), float(parts[3]))
        except ValueError:
            ok = False
        if not ok:
            raise SnapshotFormatError(f"expected mode ({m},{k}) line, got {ln!r}")
    err = reality_defect(c)
    if err > SNAPSHOT_REALITY_TOL:
        raise SnapshotFormatError(f"reality constraint violated by {err:.3e}")
    c = 0.5 * (c + np.conj(c[::-1]))
    return GradedField(c, grade), extra


def mode_energies(basis: BasisTable, u: GradedField) -> np.ndarray:
    """Energy ``0.5 lambda |c|^2`` per (m, k), with +m and -m rows folded together."""
    e = 0.5 * basis.lam * np.abs(u.coeffs) ** 2
    M = basis.M_max
    out = e[M:].copy()
    out[1:] += e[:M][::-1]
    return out
