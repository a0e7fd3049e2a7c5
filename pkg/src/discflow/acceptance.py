"""The twelve acceptance criteria as executable checks (default resolution M = K = 8)."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .checks import CheckResult, _check, check_basis, corrupted_basis, projector_commutation
from .dynamics import (Observable, flow, hamiltonian_vector_field, lie_poisson_bracket,
                       poisson_flow_check, random_quadratic, reduced_discrepancy,
                       reduced_flow, reduced_poisson_bracket, restricted_bracket)
from .slices import canonicalize, chart_B, make_chart, solve_beta, ver_hor
from .spectral import (BasisTable, build_basis, inner_product, jacobi_lie_bracket, mode_field,
                       norm, random_field)
from .symmetry import (Subgroup, check_c1_hypothesis, fit_order, fixed_point_project, rotate,
                       symmetry_defect)

DT = 1e-3
T_FINAL = 1.0


@lru_cache(maxsize=None)
def default_basis(M: int = 8, K: int = 8) -> BasisTable:
    return build_basis(M, K)


def _rng(n: int) -> np.random.Generator:
    return np.random.default_rng(1000 + n)


def _combine(name: str, parts: list[CheckResult], detail: str = "") -> CheckResult:
    """One criterion result from sub-checks; the value is the worst ratio ``value / tol``."""
    worst = max((p.value / p.tol for p in parts), default=0.0)
    offenders = [o for p in parts for o in p.offenders]
    text = "; ".join(f"{p.name}={p.value:.3e}(<{p.tol:.0e}){'' if p.passed else ' FAIL'}" for p in parts)
    return CheckResult(name, all(p.passed for p in parts), worst, 1.0,
                       (detail + " " + text).strip(), offenders)


def criterion_01(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(1)
    worst = 0.0
    for _ in range(100):
        u, v = random_field(basis, rng), random_field(basis, rng)
        a = rng.uniform(0, 2 * math.pi)
        d = abs(inner_product(basis, rotate(basis, u, a), rotate(basis, v, a)) - inner_product(basis, u, v))
        worst = max(worst, d / (norm(basis, u) * norm(basis, v)))
    return _check("01_isometry", worst, 1e-12)


def criterion_02(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(2)
    eq = comm = 0.0
    for _ in range(50):
        u, v = random_field(basis, rng), random_field(basis, rng)
        a = rng.uniform(0, 2 * math.pi)
        lhs = jacobi_lie_bracket(basis, rotate(basis, u, a), rotate(basis, v, a))
        rhs = rotate(basis, jacobi_lie_bracket(basis, u, v), a)
        eq = max(eq, norm(basis, lhs - rhs) / max(norm(basis, rhs), 1e-300))
        comm = max(comm, projector_commutation(basis, u, v, a, rng))
    return _combine("02_equivariance", [_check("bracket", eq, 1e-8), _check("projector", comm, 1e-8)])


def criterion_03(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(3)
    orders = [check_c1_hypothesis(basis, random_field(basis, rng, grade=2.0)).order for _ in range(10)]
    dev = max(abs(o - 1.0) for o in orders)
    return _check("03_c1_order", dev, 0.1 + 1e-15,
                  f"orders in [{min(orders):.4f}, {max(orders):.4f}], need [0.9, 1.1]")


def _unit_field(basis, rng, **kw):
    u = random_field(basis, rng, **kw)
    return u * (1.0 / norm(basis, u))


def criterion_04(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(4)
    beta = orbit = 0.0
    for _ in range(5):
        q = _unit_field(basis, rng, decay=3)
        chart = make_chart(basis, q)
        for a0 in np.linspace(-0.3, 0.3, 13):
            beta = max(beta, abs(solve_beta(chart, rotate(basis, q, a0)) + a0))
        r = q + _unit_field(basis, rng, decay=3) * 0.05
        ref = chart_B(chart, r).rep
        for a in np.linspace(-0.3, 0.3, 20):
            orbit = max(orbit, norm(basis, chart_B(chart, rotate(basis, r, a)).rep - ref))
    return _combine("04_slice_solver", [_check("beta", beta, 1e-10), _check("orbit", orbit, 1e-10)])


def criterion_05(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(5)
    q = _unit_field(basis, rng)
    chart = make_chart(basis, q)
    exact = idem = cross = 0.0
    for _ in range(100):
        v = _unit_field(basis, rng)
        y = _unit_field(basis, rng)
        ver, hor = ver_hor(basis, chart, v)
        exact = max(exact, float(np.max(np.abs((ver + hor - v).coeffs))))
        idem = max(idem, norm(basis, ver_hor(basis, chart, ver)[0] - ver),
                   norm(basis, ver_hor(basis, chart, hor)[1] - hor))
        yv, yh = ver_hor(basis, chart, y)
        cross = max(cross, abs(inner_product(basis, ver, yh)), abs(inner_product(basis, hor, yv)))
    return _combine("05_splitting", [_check("sum", exact, 1e-12), _check("idempotence", idem, 1e-12),
                                     _check("orthogonality", cross, 1e-12)])


def criterion_06(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(6)
    h = Observable.energy()
    worst = 0.0
    for i in range(50):
        if i % 10 == 0:
            u = random_field(basis, rng, decay=3)
            X = hamiltonian_vector_field(basis, h, u)
        f = random_quadratic(basis, rng)
        df = f.derivative(basis, u)
        d = abs(inner_product(basis, df, X) - lie_poisson_bracket(basis, f, h, u))
        worst = max(worst, d / (norm(basis, df) * norm(basis, X)))
    return _check("06_hamiltonian_pairing", worst, 1e-8, "scale = |df| |X_h|")


def criterion_07(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(7)
    u = random_field(basis, rng, m_allowed=[0], energy=0.5)
    X = hamiltonian_vector_field(basis, Observable.energy(), u)
    traj = flow(basis, u, DT, T_FINAL, record=False)
    moved = max(norm(basis, s - u) for s in traj.states) / norm(basis, u)
    return _combine("07_steady_swirl", [_check("X_h", norm(basis, X) / norm(basis, u) ** 2, 1e-8),
                                        _check("motion", moved, 1e-6)])


def criterion_08(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(8)
    parts = []
    for n in (2, 3):
        u0 = random_field(basis, rng, m_allowed=range(0, basis.M_max + 1, n), energy=0.5)
        traj = flow(basis, u0, DT, T_FINAL)
        parts.append(_check(f"defect_Z{n}", max(d[f"defect_n{n}"] for d in traj.diagnostics), 1e-10))
        if n == 2:
            a = rng.uniform(0, 2 * math.pi)
            rot = flow(basis, rotate(basis, u0, a), DT, T_FINAL, record=False).states[-1]
            err = norm(basis, rot - rotate(basis, traj.states[-1], a)) / norm(basis, u0)
            parts.append(_check("equivariance", err, 1e-6))
    return _combine("08_isotropy_conservation", parts)


def max_drift(records, key: str) -> float:
    """Largest deviation of ``key`` from its initial value over ``[0, T]``."""
    return max(abs(r[key] - records[0][key]) for r in records)


def criterion_09(basis: BasisTable | None = None) -> CheckResult:
    """Drift orders on evolving data plus absolute drifts on a single mode."""
    basis = basis or default_basis()
    rng = _rng(9)
    u0 = random_field(basis, rng, energy=1.0)
    dts = (4e-3, 2e-3, 1e-3)
    de, dl = [], []
    for dt in dts:
        d = flow(basis, u0, dt, T_FINAL).diagnostics
        de.append(max_drift(d, "energy") / d[0]["energy"])
        dl.append(max_drift(d, "angular_momentum") / abs(d[0]["angular_momentum"]))
    single = mode_field(basis, {(1, 1): 1.0})
    d = flow(basis, single, DT, T_FINAL).diagnostics
    abs_e = max_drift(d, "energy")
    abs_l = max_drift(d, "angular_momentum")
    oe, ol = fit_order(dts, de), fit_order(dts, dl)
    parts = [
        CheckResult("energy_order", oe >= 3.5, oe, 3.5, f"drifts {['%.2e' % x for x in de]}"),
        CheckResult("angmom_order", ol >= 3.5, ol, 3.5, f"drifts {['%.2e' % x for x in dl]}"),
        _check("energy_abs", abs_e, 1e-7),
        _check("angmom_abs", abs_l, 1e-7),
    ]
    text = "; ".join(f"{p.name}={p.value:.3e}{'' if p.passed else ' FAIL'} ({p.detail})".replace(" ()", "")
                     for p in parts)
    return CheckResult("09_drift_orders", all(p.passed for p in parts), min(oe, ol), 3.5,
                       "value is the smaller fitted order, needs >= 3.5; " + text)


def criterion_10(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(10)
    u = random_field(basis, rng, m_allowed=range(0, basis.M_max + 1, 2), energy=0.5)
    p = canonicalize(basis, u, Subgroup.cyclic(2))
    a = reduced_flow(basis, p, DT, 0.5, "quotient")
    b = reduced_flow(basis, p, DT, 0.5, "chart")
    ok = a.status == "ok" and b.status == "ok"
    res = _check("10_commuting_diagram", reduced_discrepancy(basis, a, b), 1e-6,
                 f"statuses {a.status}/{b.status}")
    res.passed = res.passed and ok
    return res


def well_resolved_field(basis: BasisTable, rng, m_cut: int = 2, k_cut: int = 2):
    """Random field supported on ``|m| <= m_cut``, ``k <= k_cut``, unit norm."""
    u = random_field(basis, rng, decay=3)
    keep = (np.abs(basis.m_values)[:, None] <= m_cut) & (np.arange(1, basis.K_max + 1)[None, :] <= k_cut)
    u = u.with_coeffs(np.where(keep, u.coeffs, 0.0))
    return u * (1.0 / norm(basis, u))


def criterion_11(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(11)
    H = Subgroup.cyclic(2)
    restr = proj = 0.0
    for _ in range(10):
        u = random_field(basis, rng, m_allowed=range(0, basis.M_max + 1, 2))
        f = random_quadratic(basis, rng)
        g = Observable.linear(fixed_point_project(basis, random_field(basis, rng), H))
        full = lie_poisson_bracket(basis, f, g, u)
        restr = max(restr, abs(restricted_bracket(basis, f, g, u, H) - full) / max(abs(full), 1e-300))

        rep = canonicalize(basis, u, H)
        f2, g2 = random_quadratic(basis, rng), random_quadratic(basis, rng)
        w = rotate(basis, rep.rep, rng.uniform(0, 2 * math.pi))
        up = lie_poisson_bracket(basis, f2, g2, w)
        down = reduced_poisson_bracket(basis, f2, g2, canonicalize(basis, w, H))
        proj = max(proj, abs(up - down) / max(abs(up), 1e-300))
    small = default_basis(6, 6)
    flow_err = 0.0
    for _ in range(3):
        u0 = well_resolved_field(small, rng)
        rep = poisson_flow_check(small, random_quadratic(small, rng), random_quadratic(small, rng), u0, 0.1)
        flow_err = max(flow_err, rep.relative)
    return _combine("11_poisson_maps", [_check("restriction", restr, 1e-12),
                                        _check("projection", proj, 1e-6),
                                        _check("flow", flow_err, 1e-4)])


NEGATIVE_CONTROL_MODE = (2, 3)


def criterion_12(basis: BasisTable | None = None) -> CheckResult:
    basis = basis or default_basis()
    rng = _rng(12)
    m, k = NEGATIVE_CONTROL_MODE
    bad = corrupted_basis(basis, m, k)
    failures = [r for r in check_basis(bad) if not r.passed]
    named = any((m, k) in r.offenders for r in failures)
    u = random_field(basis, rng)
    defects = {n: symmetry_defect(basis, u, n) for n in (2, 3, 4)}
    detected = [n for n, d in defects.items() if d > 1e-3]
    ok = bool(failures) and named and detected == [2, 3, 4]
    detail = (f"corrupted ({m},{k}) failed {[r.name for r in failures]}; "
              f"defects {', '.join(f'n={n}:{d:.2e}' for n, d in defects.items())}")
    return CheckResult("12_negative_controls", ok, 0.0 if ok else 1.0, 0.5, detail,
                       [(m, k)] + [("n", n) for n in detected])


CRITERIA = (criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06,
            criterion_07, criterion_08, criterion_09, criterion_10, criterion_11, criterion_12)


def run_all() -> list[CheckResult]:
    out = []
    for fn in CRITERIA:
        r = fn()
        r.name = "acceptance." + r.name
        out.append(r)
    return out
