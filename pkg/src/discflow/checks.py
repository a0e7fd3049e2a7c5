"""Named invariant checks grouped by selector, each returning measured value and tolerance."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .bessel import jn
from .spectral import (BasisTable, GridField, advect, analyze, build_basis,
                       divergence, grid_inner, inner_product, jacobi_lie_bracket, kinematics,
                       leray_project, mode_field, norm, random_field, rebuild_with_zeros,
                       synthesize)
from .symmetry import (RigidRotation, Subgroup, TruncationWarning, check_c1_hypothesis,
                       classify_isotropy, fixed_point_project, generator, killing_field,
                       rotate, rotation_scan, symmetry_defect)
from .slices import (canonicalize, chart_B, chart_pushforward, make_chart,
                     reduced_bracket_vectors, reduced_metric, s_map_derivative,
                     solve_beta, ver_hor)
from .dynamics import (Observable, flow, hamiltonian_vector_field, lie_poisson_bracket,
                       random_quadratic, reduced_discrepancy, reduced_flow, step)

SELECTORS = ("all", "basis", "action", "slice", "bracket", "flow")


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""
    offenders: list = field(default_factory=list)
    informational: bool = False

    def line(self) -> str:
        tag = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        extra = f" offenders={self.offenders}" if self.offenders else ""
        return f"{tag} {self.name}: value={self.value:.3e} tol={self.tol:.1e}{extra} {self.detail}".rstrip()


@dataclass
class SuiteReport:
    selector: str
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if not r.informational)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed and not r.informational]

    def to_json(self) -> str:
        return json.dumps({"selector": self.selector, "passed": self.passed,
                           "results": [_jsonable(asdict(r)) for r in self.results]}, indent=2)


def _jsonable(d: dict) -> dict:
    out = dict(d)
    v = out["value"]
    out["value"] = None if not math.isfinite(v) else float(v)
    out["offenders"] = [list(o) if isinstance(o, tuple) else o for o in out["offenders"]]
    return out


def _check(name, value, tol, detail="", offenders=None, informational=False) -> CheckResult:
    value = float(value)
    passed = bool(value < tol) and not offenders
    return CheckResult(name, passed, value, tol, detail, list(offenders or []), informational)


def _rng(tag: str) -> np.random.Generator:
    return np.random.default_rng(sum(map(ord, tag)))


def _random_grid(basis: BasisTable, rng) -> GridField:
    return GridField(rng.standard_normal((2,) + basis.grid_shape))


# ---------------------------------------------------------------------------
# basis

def check_basis(basis: BasisTable) -> list[CheckResult]:
    out = []
    rng = _rng("basis")
    M, K = basis.M_max, basis.K_max
    bad, worst = [], 0.0
    for m in range(M + 1):
        vals = np.abs(jn(m, basis.zeros[m]))
        worst = max(worst, float(vals.max()))
        bad += [(m, int(k) + 1) for k in np.nonzero(vals >= 1e-12)[0]]
    out.append(_check("basis.zero_residual", worst, 1e-12, "max |J_m(j_mk)|", bad))
    steps = np.diff(basis.zeros, axis=1)
    bad = [(int(m), int(k) + 2) for m, k in np.argwhere(steps <= 0)]
    out.append(_check("basis.zeros_increasing", 0.0 if not bad else 1.0, 0.5, offenders=bad))

    # orthonormality: each unit mode must survive synthesize -> analyze
    bad, worst = [], 0.0
    for m in range(M + 1):
        for k in range(1, K + 1):
            e = mode_field(basis, {(m, k): 1.0})
            back = analyze(basis, synthesize(basis, e))
            err = float(np.max(np.abs(back.coeffs - e.coeffs)))
            worst = max(worst, err)
            if err >= 1e-10:
                bad.append((m, k))
    out.append(_check("basis.orthonormality", worst, 1e-10, "max coefficient error", bad))

    # boundary tangency: normal velocity -psi_theta at r = 1 is m N J_m(j)
    edge = np.array([[basis.norm_constants[m, k] * m * abs(jn(m, basis.zeros[m, k]))
                      for k in range(K)] for m in range(M + 1)])
    bad = [(int(m), int(k) + 1) for m, k in np.argwhere(edge >= 1e-10)]
    out.append(_check("basis.boundary_tangency", edge.max(), 1e-10, "max |u.n| per unit mode", bad))

    u = random_field(basis, rng)
    back = analyze(basis, synthesize(basis, u))
    out.append(_check("basis.roundtrip_random", np.max(np.abs(back.coeffs - u.coeffs)), 1e-10))

    w = _random_grid(basis, rng)
    pw, rest = leray_project(basis, w)
    wsq = grid_inner(basis, w, w)
    out.append(_check("basis.leray_orthogonality",
                      abs(grid_inner(basis, synthesize(basis, pw), rest)) / wsq, 1e-8))
    ppw, _ = leray_project(basis, synthesize(basis, pw))
    out.append(_check("basis.leray_idempotence", np.max(np.abs(ppw.coeffs - pw.coeffs)), 1e-10))

    kin = kinematics(basis, u)
    scale = np.max(np.abs(kin.grad))
    out.append(_check("basis.divergence_free", np.max(np.abs(divergence(kin))) / scale, 1e-12))

    v, z = random_field(basis, rng), random_field(basis, rng)
    lhs = grid_inner(basis, advect(basis, u, v), synthesize(basis, z))
    rhs = grid_inner(basis, synthesize(basis, v), advect(basis, u, z))
    mag = max(abs(lhs), abs(rhs), 1.0)
    out.append(_check("basis.advection_skew", abs(lhs + rhs) / mag, 1e-8, "relative"))

    br = jacobi_lie_bracket(basis, u, v)
    kb = kinematics(basis, br)
    out.append(_check("basis.bracket_closure",
                      np.max(np.abs(divergence(kb))) / max(np.max(np.abs(kb.grad)), 1e-300), 1e-8))
    out.append(_check("basis.grade_rule", abs(br.grade - (min(u.grade, v.grade) - 1)), 0.5))
    return out


# ---------------------------------------------------------------------------
# group action

def check_action(basis: BasisTable) -> list[CheckResult]:
    out = []
    rng = _rng("action")
    ax = iso = eq = comm = 0.0
    for _ in range(20):
        u, v = random_field(basis, rng), random_field(basis, rng)
        a, b = rng.uniform(0, 2 * np.pi, 2)
        ax = max(ax, np.max(np.abs(rotate(basis, rotate(basis, u, a), b).coeffs
                                   - rotate(basis, u, a + b).coeffs)) / norm(basis, u))
        iso = max(iso, abs(inner_product(basis, rotate(basis, u, a), rotate(basis, v, a))
                           - inner_product(basis, u, v)) / (norm(basis, u) * norm(basis, v)))
        lhs = jacobi_lie_bracket(basis, rotate(basis, u, a), rotate(basis, v, a))
        rhs = rotate(basis, jacobi_lie_bracket(basis, u, v), a)
        eq = max(eq, norm(basis, lhs - rhs) / (norm(basis, u) * norm(basis, v)))
        comm = max(comm, projector_commutation(basis, u, v, a, rng))
    out.append(_check("action.composition", ax, 1e-14))
    out.append(_check("action.isometry", iso, 1e-12))
    out.append(_check("action.bracket_equivariance", eq, 1e-8))
    out.append(_check("action.projector_commutation", comm, 1e-8))

    bad = []
    for trial in range(12):
        ms = sorted(set(rng.choice(np.arange(1, basis.M_max + 1), size=rng.integers(1, 3))))
        u = random_field(basis, rng, m_allowed=[0] + [int(m) for m in ms])
        if classify_isotropy(basis, u) != rotation_scan(basis, u):
            bad.append(tuple(int(m) for m in ms))
    out.append(_check("action.isotropy_vs_scan", len(bad), 0.5, "disagreements", bad))

    gen_err = 0.0
    for _ in range(5):
        u = random_field(basis, rng)
        br = jacobi_lie_bracket(basis, u, RigidRotation(1.0))
        gen_err = max(gen_err, norm(basis, br - generator(basis, u)) / norm(basis, generator(basis, u)))
    out.append(_check("action.generator_vs_rigid_bracket", gen_err, 1e-8))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        z = killing_field(basis, 1.0)
    u = random_field(basis, rng)
    trunc = norm(basis, jacobi_lie_bracket(basis, u, z) - generator(basis, u)) / norm(basis, generator(basis, u))
    out.append(_check("action.generator_vs_truncated_killing", trunc, 1e-6,
                      "truncated rigid rotation; shrinks as K_max grows", informational=True))

    u = random_field(basis, rng)
    H = Subgroup.cyclic(2)
    p = fixed_point_project(basis, u, H)
    pyth = abs(norm(basis, u) ** 2 - norm(basis, p) ** 2 - norm(basis, u - p) ** 2) / norm(basis, u) ** 2
    idem = np.max(np.abs(fixed_point_project(basis, p, H).coeffs - p.coeffs))
    out.append(_check("action.fixed_point_pythagoras", pyth, 1e-12))
    out.append(_check("action.fixed_point_idempotent", idem, 1e-15))
    out.append(_check("action.fixed_point_invariant", symmetry_defect(basis, p, 2), 1e-14))

    worst = 0.0
    for _ in range(3):
        rep = check_c1_hypothesis(basis, random_field(basis, rng, grade=2.0))
        worst = max(worst, abs(rep.order - 1.0))
    out.append(_check("action.c1_order", worst, 0.1, "|fitted order - 1|"))
    return out


def projector_commutation(basis, u, v, alpha, rng) -> float:
    """``P(l w) - l P(w)`` for ``w = grad_u v`` plus a random grid field rotated by a grid shift."""
    w = advect(basis, u, v)
    lw = advect(basis, rotate(basis, u, alpha), rotate(basis, v, alpha))
    pw = analyze(basis, w)
    err = norm(basis, analyze(basis, lw) - rotate(basis, pw, alpha)) / max(norm(basis, pw), 1e-300)
    g = _random_grid(basis, rng)
    shift = int(rng.integers(1, basis.n_theta))
    beta = 2 * np.pi * shift / basis.n_theta
    c, s = np.cos(beta), np.sin(beta)
    vals = np.roll(g.values, shift, axis=-1)
    lg = GridField(np.stack([c * vals[0] - s * vals[1], s * vals[0] + c * vals[1]]))
    pg = analyze(basis, g)
    err2 = norm(basis, analyze(basis, lg) - rotate(basis, pg, beta)) / max(norm(basis, pg), 1e-300)
    return max(err, err2)


# ---------------------------------------------------------------------------
# slices

def check_slice(basis: BasisTable) -> list[CheckResult]:
    out = []
    rng = _rng("slice")
    q = random_field(basis, rng, decay=3)
    q = q * (1.0 / norm(basis, q))
    chart = make_chart(basis, q)
    out.append(_check("slice.base_horizontal", abs(inner_product(basis, q, chart.E_hat)), 1e-12))
    out.append(_check("slice.unit_generator", abs(inner_product(basis, chart.E_hat, chart.E_hat) - 1), 1e-12))
    gram = s_map_derivative(chart, 0.0, q)
    out.append(_check("slice.gram_positive", abs(gram - chart.E_norm) / chart.E_norm, 1e-12,
                      f"ds/dalpha={gram:.4g}"))
    beta_err = max(abs(solve_beta(chart, rotate(basis, q, a)) + a) for a in np.linspace(-0.3, 0.3, 13))
    out.append(_check("slice.solve_beta", beta_err, 1e-10))
    r = q + random_field(basis, rng, decay=3) * 0.05
    base = chart_B(chart, r)
    orbit = max(norm(basis, chart_B(chart, rotate(basis, r, a)).rep - base.rep)
                for a in np.linspace(-0.3, 0.3, 20))
    out.append(_check("slice.orbit_invariance", orbit, 1e-10))
    inv = norm(basis, rotate(basis, base.rep, -base.angle) - r)
    out.append(_check("slice.chart_inversion", inv, 1e-10))

    worst = 0.0
    for _ in range(20):
        v, y = random_field(basis, rng), random_field(basis, rng)
        ver, hor = ver_hor(basis, chart, v)
        vv, vh = ver_hor(basis, chart, ver)
        hv, hh = ver_hor(basis, chart, hor)
        yv, yh = ver_hor(basis, chart, y)
        s2 = norm(basis, v) * norm(basis, y)
        worst = max(worst, np.max(np.abs((ver + hor - v).coeffs)) / norm(basis, v),
                    norm(basis, vv - ver) / norm(basis, v), norm(basis, hh - hor) / norm(basis, v),
                    abs(inner_product(basis, ver, yh)) / s2)
    out.append(_check("slice.ver_hor_projectors", worst, 1e-12))

    u = random_field(basis, rng, m_allowed=[0, 2, 4, 6, 8])
    c0 = canonicalize(basis, u).rep
    sec = max(norm(basis, canonicalize(basis, rotate(basis, u, a)).rep - c0) / norm(basis, u)
              for a in np.linspace(0, 2 * np.pi, 24, endpoint=False))
    out.append(_check("slice.canonical_section_invariance", sec, 1e-12))

    xi, eta = random_field(basis, rng), random_field(basis, rng)
    a = 0.7
    g0 = reduced_metric(basis, q, xi, eta)
    g1 = reduced_metric(basis, rotate(basis, q, a), rotate(basis, xi, a), rotate(basis, eta, a))
    out.append(_check("slice.reduced_metric_equivariance", abs(g0 - g1) / max(abs(g0), 1.0), 1e-10))
    xi, eta = xi * (1 / norm(basis, xi)), eta * (1 / norm(basis, eta))
    rb = reduced_bracket_vectors(basis, q, xi, eta)
    _, hx = ver_hor(basis, q, xi)
    _, he = ver_hor(basis, q, eta)
    two = chart_pushforward(basis, q, jacobi_lie_bracket(basis, hx, he))
    out.append(_check("slice.reduced_bracket_two_path", norm(basis, rb - two) / norm(basis, rb), 1e-8))
    return out


# ---------------------------------------------------------------------------
# bracket

def check_bracket(basis: BasisTable) -> list[CheckResult]:
    out = []
    rng = _rng("bracket")
    u = random_field(basis, rng, decay=3)
    h = Observable.energy()
    anti = cons = 0.0
    for _ in range(10):
        f, g = random_quadratic(basis, rng), random_quadratic(basis, rng)
        fg, gf = lie_poisson_bracket(basis, f, g, u), lie_poisson_bracket(basis, g, f, u)
        anti = max(anti, abs(fg + gf) / max(abs(fg), 1e-300))
        X = hamiltonian_vector_field(basis, h, u)
        df = f.derivative(basis, u)
        lhs = inner_product(basis, df, X)
        cons = max(cons, abs(lhs - lie_poisson_bracket(basis, f, h, u)) / (norm(basis, df) * norm(basis, X)))
    out.append(_check("bracket.antisymmetry", anti, 1e-12))
    out.append(_check("bracket.hamiltonian_pairing", cons, 1e-8))

    # general X_h formula against the energy shortcut
    A = Observable.quadratic(np.ones(basis.coeff_shape))
    Xg = hamiltonian_vector_field(basis, A, u)
    Xe = hamiltonian_vector_field(basis, h, u)
    out.append(_check("bracket.energy_shortcut", norm(basis, Xg - Xe) / norm(basis, Xe), 1e-8))

    # Leibniz: {f g, k} = f {g, k} + g {f, k}
    f, g, k = (random_quadratic(basis, rng) for _ in range(3))
    dfg = f.product_derivative(g, basis, u)
    prod = inner_product(basis, u, jacobi_lie_bracket(basis, k.derivative(basis, u), dfg))
    rhs = (f.value(basis, u) * lie_poisson_bracket(basis, g, k, u)
           + g.value(basis, u) * lie_poisson_bracket(basis, f, k, u))
    out.append(_check("bracket.leibniz", abs(prod - rhs) / max(abs(rhs), 1e-300), 1e-10))

    # Jacobi for linear observables reduces to the Jacobi identity of [., .]
    a, b, c = (random_field(basis, rng, decay=4) for _ in range(3))
    jac = (jacobi_lie_bracket(basis, a, jacobi_lie_bracket(basis, b, c))
           + jacobi_lie_bracket(basis, b, jacobi_lie_bracket(basis, c, a))
           + jacobi_lie_bracket(basis, c, jacobi_lie_bracket(basis, a, b)))
    scale = norm(basis, jacobi_lie_bracket(basis, a, jacobi_lie_bracket(basis, b, c)))
    out.append(_check("bracket.jacobi_linear", abs(inner_product(basis, u, jac)) / (norm(basis, u) * scale),
                      1e-6, "not contractual for the truncated bracket", informational=True))

    worst = 0.0
    v = random_field(basis, rng)
    for obs in (random_quadratic(basis, rng), Observable.energy(), Observable.linear(random_field(basis, rng))):
        errs = []
        for eps in (1e-2, 1e-3):
            fd = (obs.value(basis, u + v * eps) - obs.value(basis, u - v * eps)) / (2 * eps)
            errs.append(abs(fd - inner_product(basis, obs.derivative(basis, u), v)))
        worst = max(worst, errs[1] / max(abs(inner_product(basis, obs.derivative(basis, u), v)), 1.0))
    out.append(_check("bracket.functional_derivative", worst, 1e-8))

    swirl = random_field(basis, rng, m_allowed=[0])
    Xs = hamiltonian_vector_field(basis, h, swirl)
    out.append(_check("bracket.swirl_steady", norm(basis, Xs) / norm(basis, swirl) ** 2, 1e-8))
    return out


# ---------------------------------------------------------------------------
# flow

def check_flow(basis: BasisTable, T: float = 0.2, dt: float = 1e-3) -> list[CheckResult]:
    out = []
    rng = _rng("flow")
    u0 = random_field(basis, rng, m_allowed=[0, 2, 4, 6, 8], energy=0.5)
    traj = flow(basis, u0, dt, T)
    out.append(_check("flow.isotropy_conservation", max(d["defect_n2"] for d in traj.diagnostics), 1e-10))
    e = [d["energy"] for d in traj.diagnostics]
    out.append(_check("flow.energy_drift", abs(e[-1] - e[0]) / e[0], 1e-8))
    a = 1.1
    rot = flow(basis, rotate(basis, u0, a), dt, T, record=False).states[-1]
    out.append(_check("flow.equivariance", norm(basis, rot - rotate(basis, traj.states[-1], a)) / norm(basis, u0), 1e-6))
    # rk4 one-step error ratio under halving, against a fine reference
    v0 = random_field(basis, rng, energy=0.5)
    h = 0.04
    ref = flow(basis, v0, h / 40, h, record=False).states[-1]
    e1 = norm(basis, step(basis, v0, h) - ref)
    e2 = norm(basis, flow(basis, v0, h / 2, h, record=False).states[-1] - ref)
    order = math.log2(e1 / e2)
    out.append(_check("flow.rk4_order", abs(order - 4.0), 0.6, f"observed order {order:.2f}"))
    p = canonicalize(basis, u0)
    qa = reduced_flow(basis, p, dt, T, "quotient")
    qb = reduced_flow(basis, p, dt, T, "chart")
    out.append(_check("flow.reduced_modes_agree", reduced_discrepancy(basis, qa, qb), 1e-6))
    return out


GROUPS = {"basis": check_basis, "action": check_action, "slice": check_slice,
          "bracket": check_bracket, "flow": check_flow}


def corrupted_basis(basis: BasisTable, m: int, k: int, delta: float = 1e-3) -> BasisTable:
    """Copy of ``basis`` with the zero ``j_{m,k}`` shifted by ``delta``."""
    zeros = basis.zeros.copy()
    zeros[m, k - 1] += delta
    return rebuild_with_zeros(basis, zeros)


def run_suite(selector: str, basis: BasisTable | None = None, acceptance: bool = True) -> SuiteReport:
    """Run one selector; ``all`` runs every group and then the acceptance criteria."""
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; choose from {SELECTORS}")
    basis = build_basis(8, 8) if basis is None else basis
    names = list(GROUPS) if selector == "all" else [selector]
    results = []
    for name in names:
        results.extend(GROUPS[name](basis))
    if selector == "all" and acceptance:
        from .acceptance import run_all
        results.extend(run_all())
    return SuiteReport(selector, results)
