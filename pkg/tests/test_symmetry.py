import math
import warnings

import numpy as np
import pytest

from discflow.spectral import inner_product, mode_field, norm, random_field, sobolev_norm
from discflow.symmetry import (GroupElement, Subgroup, TruncationWarning, active_modes,
                               check_c1_hypothesis, classify_isotropy, fit_order,
                               fixed_point_project, generator, killing_field, rotate,
                               rotation_scan, symmetry_defect)


def test_quarter_turn_of_m2_mode(small):
    u = mode_field(small, {(2, 1): 1.0})
    v = rotate(small, u, math.pi / 2)
    i, j = small.mode_index(2, 1)
    assert abs(v.coeffs[i, j] - (-1.0)) < 1e-15


def test_rotation_moves_pattern(small):
    # rotating by alpha means the new field at theta equals the old at theta - alpha
    from discflow.spectral import stream_function
    u = mode_field(small, {(1, 2): 0.3 + 0.4j, (3, 1): 1.0})
    step = 2 * math.pi / small.n_theta
    v = rotate(small, u, 3 * step)
    np.testing.assert_allclose(stream_function(small, v), np.roll(stream_function(small, u), 3, axis=1),
                               atol=1e-13)


def test_group_law(small, rng):
    u = random_field(small, rng)
    a, b = 0.7, -2.1
    lhs = rotate(small, rotate(small, u, a), b)
    np.testing.assert_allclose(lhs.coeffs, rotate(small, u, a + b).coeffs, atol=1e-14)
    np.testing.assert_allclose(rotate(small, u, 2 * math.pi).coeffs, u.coeffs, atol=1e-13)
    np.testing.assert_allclose(rotate(small, u, GroupElement(a)).coeffs, rotate(small, u, a).coeffs)


def test_defect_values(small):
    u = mode_field(small, {(3, 1): 1.0})
    assert abs(symmetry_defect(small, u, 2) - 2.0) < 1e-14
    assert symmetry_defect(small, u, 3) < 1e-14
    assert symmetry_defect(small, u, 1) == 0.0
    with pytest.raises(ValueError):
        symmetry_defect(small, u, 0)


@pytest.mark.parametrize("modes,expected", [
    ({(0, 1): 1.0}, Subgroup.full()),
    ({(2, 1): 1.0, (4, 3): 0.5j}, Subgroup.cyclic(2)),
    ({(3, 2): 1.0}, Subgroup.cyclic(3)),
    ({(2, 1): 1.0, (3, 1): 1.0}, Subgroup.trivial()),
    ({(4, 1): 1.0, (0, 2): 2.0}, Subgroup.cyclic(4)),
])
def test_isotropy_against_brute_force(small, modes, expected):
    u = mode_field(small, modes)
    assert classify_isotropy(small, u) == expected
    assert rotation_scan(small, u) == expected


def test_isotropy_threshold(small):
    u = mode_field(small, {(2, 1): 1.0, (1, 1): 1e-13})
    assert classify_isotropy(small, u) == Subgroup.cyclic(2)
    assert classify_isotropy(small, u, tol=1e-15) == Subgroup.trivial()
    with pytest.raises(ValueError):
        classify_isotropy(small, u, tol=0)


def test_active_modes_sorted(small):
    u = mode_field(small, {(3, 1): 1.0, (1, 2): 1.0, (1, 1): 1.0, (0, 1): 5.0})
    assert active_modes(small, u) == [(1, 1), (1, 2), (3, 1)]


def test_fixed_point_projection(small, rng):
    u = random_field(small, rng)
    H = Subgroup.cyclic(2)
    p = fixed_point_project(small, u, H)
    assert symmetry_defect(small, p, 2) < 1e-15
    # orthogonal projection: residual is orthogonal to the fixed subspace
    assert abs(inner_product(small, u - p, p)) < 1e-12 * norm(small, u) ** 2
    np.testing.assert_allclose(fixed_point_project(small, p, H).coeffs, p.coeffs)


def test_generator_is_derivative_of_rotation(small, rng):
    u = random_field(small, rng)
    h = 1e-6
    fd = (rotate(small, u, h) - rotate(small, u, -h)) * (0.5 / h)
    np.testing.assert_allclose(fd.coeffs, generator(small, u).coeffs, atol=1e-8)
    assert generator(small, u).grade == u.grade - 1


def test_c1_order_is_one(basis, rng):
    rep = check_c1_hypothesis(basis, random_field(basis, rng, grade=2.0))
    assert 0.9 <= rep.order <= 1.1 and rep.converges
    assert rep.grade == 1.0


def test_c1_for_invariant_field(small):
    rep = check_c1_hypothesis(small, mode_field(small, {(0, 1): 1.0}, grade=1))
    assert np.all(rep.residuals == 0) and rep.converges


def test_fit_order():
    h = np.array([1e-1, 1e-2, 1e-3])
    assert abs(fit_order(h, 3 * h**2) - 2) < 1e-12
    assert math.isnan(fit_order(h, [0, 0, 1]))


def test_killing_field_truncation_warning(small):
    with pytest.warns(TruncationWarning):
        k = killing_field(small, 1.0)
    assert np.all(k.coeffs[np.abs(small.m_values) > 0] == 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        killing_field(small, 0.0)


def test_subgroup_parse_roundtrip():
    for H in (Subgroup.trivial(), Subgroup.cyclic(5), Subgroup.full()):
        assert Subgroup.parse(str(H)) == H
    for bad in ("cyclic:1", "cyclic:x", "dihedral"):
        with pytest.raises(ValueError):
            Subgroup.parse(bad)
    assert Subgroup.cyclic(1) == Subgroup.trivial()
    assert Subgroup.cyclic(6).contains_cyclic(3) and not Subgroup.cyclic(6).contains_cyclic(4)
    assert Subgroup.full().order == 0


def test_isometry_in_every_grade(small, rng):
    u = random_field(small, rng)
    for s in (0.0, 1.0, 2.5):
        assert math.isclose(sobolev_norm(small, rotate(small, u, 1.3), s), sobolev_norm(small, u, s),
                            rel_tol=1e-13)
