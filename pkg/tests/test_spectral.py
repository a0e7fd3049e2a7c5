import math

import numpy as np
import pytest
from scipy import special

from discflow.spectral import (BasisMismatchError, GradedField, GridField, SnapshotFormatError,
                               analyze, build_basis, divergence, format_snapshot, grid_inner,
                               inner_product, jacobi_lie_bracket, kinematics, leray_project,
                               mode_energies, mode_field, norm, parse_snapshot, random_field,
                               sobolev_norm, stream_function, synthesize, transform, vorticity,
                               zero_field)
from discflow.symmetry import RigidRotation, generator


def oracle_velocity(m, k, c, r, th):
    """Cartesian velocity of the real mode pair (m, k) from scipy Bessel values.

    The complex mode is N J_m(j r) e^{i m th} with unit L2 norm on the disc,
    so N = 1 / (sqrt(pi) |J_{m+1}(j)|).
    """
    j = special.jn_zeros(m, k)[-1]
    N = 1.0 / (math.sqrt(math.pi) * abs(special.jv(m + 1, j)))
    phase = np.exp(1j * m * th)
    R = N * special.jv(m, j * r)
    dR = N * j * special.jvp(m, j * r)
    fac = 1.0 if m == 0 else 2.0  # c e^{} + conj
    psi_r = fac * np.real(c * dR * phase)
    psi_t = fac * np.real(c * 1j * m * R * phase)
    ur, ut = -psi_t / r, psi_r
    return ur * np.cos(th) - ut * np.sin(th), ur * np.sin(th) + ut * np.cos(th)


@pytest.mark.parametrize("m,k", [(0, 1), (1, 1), (2, 3), (3, 2), (4, 4)])
def test_synthesis_matches_oracle(small, m, k):
    c = 0.7 - 0.3j if m else 0.7
    u = synthesize(small, mode_field(small, {(m, k): c}))
    r = small.r_nodes[:, None]
    th = small.theta[None, :]
    ux, uy = oracle_velocity(m, k, c, r, th)
    np.testing.assert_allclose(u.values[0], ux, atol=1e-11)
    np.testing.assert_allclose(u.values[1], uy, atol=1e-11)


def test_energy_matches_fine_quadrature(small):
    # independent Gauss-Legendre x trapezoid grid, much finer than the basis grid
    x, w = np.polynomial.legendre.leggauss(80)
    r = 0.5 * (x + 1)
    wr = 0.5 * w * r
    th = np.linspace(0, 2 * np.pi, 96, endpoint=False)
    R, TH = np.meshgrid(r, th, indexing="ij")
    modes = {(1, 2): 0.4 + 0.2j, (3, 1): -0.5j, (0, 2): 0.3}
    u = mode_field(small, modes)
    ux = np.zeros_like(R)
    uy = np.zeros_like(R)
    for (m, k), c in modes.items():
        a, b = oracle_velocity(m, k, c, R, TH)
        ux += a
        uy += b
    ref = np.sum(wr[:, None] * (ux**2 + uy**2)) * (2 * np.pi / len(th))
    assert abs(inner_product(small, u, u) - ref) < 1e-10 * ref


def test_single_mode_norm_is_eigenvalue(small):
    u = mode_field(small, {(2, 3): 1.0})
    assert math.isclose(norm(small, u) ** 2, 2 * small.eigenvalues[2, 2], rel_tol=1e-14)
    assert math.isclose(sobolev_norm(small, u, 1.0) ** 2, 2 * small.eigenvalues[2, 2] * (1 + small.eigenvalues[2, 2]),
                        rel_tol=1e-14)


def test_grid_and_coefficient_pairings_agree(small, rng):
    u, v = random_field(small, rng), random_field(small, rng)
    a = inner_product(small, u, v)
    b = grid_inner(small, synthesize(small, u), synthesize(small, v))
    assert abs(a - b) < 1e-12 * norm(small, u) * norm(small, v)


def test_roundtrip_and_transform_dispatch(small, rng):
    u = random_field(small, rng, grade=1.5)
    back = analyze(small, synthesize(small, u))
    np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-12)
    assert back.grade == 1.5
    via = transform(small, transform(small, u, "synthesize"), "analyze")
    np.testing.assert_allclose(via.coeffs, u.coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        transform(small, u, "sideways")


def test_divergence_free_and_tangent(small, rng):
    u = random_field(small, rng)
    kin = kinematics(small, u)
    assert np.max(np.abs(divergence(kin))) < 1e-11 * np.max(np.abs(kin.grad))


def test_stream_function_and_vorticity(small):
    u = mode_field(small, {(1, 1): 1.0})
    j = small.zeros[1, 0]
    psi = stream_function(small, u)
    # vorticity of grad_perp psi is the Laplacian of psi, and -Lap psi = j^2 psi
    w = vorticity(small, u)
    np.testing.assert_allclose(w, -j**2 * psi, atol=1e-10)
    g = kinematics(small, u).grad
    np.testing.assert_allclose(w, g[1, 0] - g[0, 1], atol=1e-10)


def test_leray_removes_gradients(small):
    # grad of phi = x^2 y is curl-free, so its projection must vanish
    r = small.r_nodes[:, None]
    th = small.theta[None, :]
    x, y = r * np.cos(th), r * np.sin(th)
    g = GridField(np.stack([2 * x * y + 0 * x, x**2 + 0 * y]))
    proj, rest = leray_project(small, g)
    assert norm(small, proj) < 1e-12
    np.testing.assert_allclose(rest.values, g.values, atol=1e-12)


def test_leray_keeps_solenoidal(small, rng):
    u = random_field(small, rng)
    proj, rest = leray_project(small, synthesize(small, u))
    np.testing.assert_allclose(proj.coeffs, u.coeffs, atol=1e-12)
    assert np.max(np.abs(rest.values)) < 1e-11


def test_bracket_antisymmetry_and_grade(small, rng):
    u = random_field(small, rng, grade=3)
    v = random_field(small, rng, grade=2)
    a = jacobi_lie_bracket(small, u, v)
    b = jacobi_lie_bracket(small, v, u)
    np.testing.assert_allclose(a.coeffs, -b.coeffs, atol=1e-12)
    assert a.grade == 1


def test_bracket_with_rigid_rotation_is_generator(small, rng):
    u = random_field(small, rng)
    br = jacobi_lie_bracket(small, u, RigidRotation(1.0))
    np.testing.assert_allclose(br.coeffs, generator(small, u).coeffs, atol=1e-11)


def test_reality_enforced():
    c = np.zeros((5, 2), dtype=complex)
    c[3, 0] = 1.0
    with pytest.raises(ValueError):
        GradedField(c)
    GradedField(c, real=False)


def test_basis_mismatch(small, rng):
    other = build_basis(3, 4)
    with pytest.raises(BasisMismatchError):
        inner_product(small, random_field(small, rng), zero_field(other))


def test_mode_field_rejects_negative_m(small):
    with pytest.raises(ValueError):
        mode_field(small, {(-1, 1): 1.0})


def test_random_field_energy_and_support(small, rng):
    u = random_field(small, rng, m_allowed=[0, 3], energy=0.25)
    assert math.isclose(0.5 * inner_product(small, u, u), 0.25, rel_tol=1e-12)
    nz = {int(abs(m)) for m in small.m_values[np.any(np.abs(u.coeffs) > 0, axis=1)]}
    assert nz == {0, 3}


def test_snapshot_roundtrip_is_exact(small, rng):
    u = random_field(small, rng, grade=2.5)
    text = format_snapshot(u, ["# note"])
    v, extra = parse_snapshot(text)
    assert extra == ["# note"]
    assert np.array_equal(v.coeffs, u.coeffs) and v.grade == 2.5
    assert format_snapshot(v, ["# note"]) == text


@pytest.mark.parametrize("mutate", [
    lambda t: "",
    lambda t: t.replace("disc-stream-v1", "other"),
    lambda t: "\n".join(t.splitlines()[:-1]),
    lambda t: t.replace("\n-4 1 ", "\n-4 2 ", 1),
    lambda t: t.replace("\n1 1 ", "\n1 1 x", 1),
])
def test_snapshot_rejects_malformed(small, rng, mutate):
    text = format_snapshot(random_field(small, rng))
    with pytest.raises(SnapshotFormatError):
        parse_snapshot(mutate(text))


def test_snapshot_rejects_reality_violation(small):
    u = mode_field(small, {(1, 1): 1.0})
    lines = format_snapshot(u).splitlines()
    lines = [ln.replace("-1 1 1.0 ", "-1 1 2.0 ") for ln in lines]
    with pytest.raises(SnapshotFormatError):
        parse_snapshot("\n".join(lines))


def test_mode_energies_sum_to_energy(small, rng):
    u = random_field(small, rng)
    e = mode_energies(small, u)
    assert e.shape == (small.M_max + 1, small.K_max)
    assert math.isclose(e.sum(), 0.5 * inner_product(small, u, u), rel_tol=1e-13)


def test_quadrature_order_parameter():
    b = build_basis(3, 3, quad_order=40)
    assert b.grid_shape[0] == 40
