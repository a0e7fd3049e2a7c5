import numpy as np
import pytest
from scipy import special

from discflow.bessel import BesselZeroError, bessel_zeros, jn, jn_all, jn_derivative

# First zeros of J_0 and J_1 (standard tables)
J01 = 2.404825557695773
J11 = 3.831705970207512


def test_frozen_first_zeros():
    assert abs(bessel_zeros(0, 1)[0] - J01) < 1e-13
    assert abs(bessel_zeros(1, 1)[0] - J11) < 1e-13


@pytest.mark.parametrize("order", range(0, 13))
def test_zeros_match_scipy(order):
    ours = bessel_zeros(order, 12)
    ref = special.jn_zeros(order, 12)
    np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-11)
    assert np.all(np.diff(ours) > 0)


def test_zeros_are_roots_and_interlace():
    for m in range(6):
        z = bessel_zeros(m, 8)
        assert np.max(np.abs(jn(m, z))) < 1e-13
        nxt = bessel_zeros(m + 1, 8)
        # j_{m,k} < j_{m+1,k} < j_{m,k+1}
        assert np.all(z < nxt) and np.all(nxt[:-1] < z[1:])


def test_values_match_scipy():
    x = np.concatenate([np.linspace(1e-6, 1.0, 40), np.linspace(1.0, 60.0, 400)])
    table = jn_all(15, x)
    for m in range(16):
        np.testing.assert_allclose(table[m], special.jv(m, x), rtol=0, atol=2e-14)


def test_derivative_matches_scipy():
    x = np.linspace(0.05, 40, 300)
    for m in range(8):
        np.testing.assert_allclose(jn_derivative(m, x), special.jvp(m, x), rtol=0, atol=1e-13)


def test_small_argument_and_zero():
    assert jn(0, 0.0) == 1.0
    assert jn(3, 0.0) == 0.0
    np.testing.assert_allclose(jn(5, 1e-3), special.jv(5, 1e-3), rtol=1e-13)


def test_zero_error_is_structured():
    with pytest.raises(BesselZeroError) as info:
        bessel_zeros(2, 5, max_iter=0)
    assert info.value.m == 2


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        bessel_zeros(-1, 3)
