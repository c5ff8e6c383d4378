import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedschwarz.model import (
    PhysicalParams,
    RegimeWarning,
    compute_eta,
    imag_real_ratio,
    principal_sqrt,
    zeroth_order_approx,
)

omegas = st.floats(0.1, 1e3)
dampings = st.floats(0.0, 1e2)
gammas = st.floats(1e-8, 1e-1)


def test_undamped_eta_and_root():
    c = compute_eta(PhysicalParams(100.0))
    assert c.eta == complex(-10000.0, 0.0)
    assert c.sqrt_eta == 100j
    assert c.rhs_scale == 1.0


def test_first_order_eta_exact():
    assert compute_eta(PhysicalParams(100.0, r=1.0)).eta == complex(-10000.0, 100.0)


def test_viscoelastic_eta_against_division():
    # -1e4 (1 - 0.01i) / (1 + 1e-4), written out by hand
    expected = complex(-1e4 / (1 + 1e-4), 1e2 / (1 + 1e-4))
    got = compute_eta(PhysicalParams(100.0, gamma=1e-4)).eta
    assert abs(got - expected) <= 1e-12 * abs(expected)
    assert got.real == pytest.approx(-9999.0001, abs=1e-4)
    assert got.imag == pytest.approx(99.9900, abs=1e-4)


def test_rhs_scale():
    c = compute_eta(PhysicalParams(50.0, r=2.0, gamma=0.003))
    assert c.rhs_scale == pytest.approx(1 / (1 + 0.15j), rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [dict(omega=0.0), dict(omega=-1.0), dict(omega=1.0, r=-0.1), dict(omega=1.0, gamma=-1e-3),
     dict(omega=math.nan), dict(omega=1.0, r=math.inf)],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        PhysicalParams(**kwargs)


def test_regime_labels():
    assert PhysicalParams(1.0).regime == "undamped"
    assert PhysicalParams(1.0, r=1).regime == "first-order"
    assert PhysicalParams(1.0, gamma=1).regime == "viscoelastic"
    assert PhysicalParams(1.0, r=1, gamma=1).regime == "mixed"


def test_principal_sqrt_examples():
    assert principal_sqrt(-10000) == 100j
    assert principal_sqrt(complex(-10000, -0.0)) == 100j
    w = principal_sqrt(1j)
    assert abs(w - (1 + 1j) / math.sqrt(2)) < 1e-15
    # polar form: modulus**0.5 times half angle
    z = complex(-10000, 100)
    expected = cmath.rect(abs(z) ** 0.5, cmath.phase(z) / 2)
    assert abs(principal_sqrt(z) - expected) < 1e-12
    assert principal_sqrt(z).real == pytest.approx(0.5, abs=1e-4)
    assert principal_sqrt(z).imag == pytest.approx(100.0012, abs=1e-4)


def test_principal_sqrt_array_matches_scalar():
    z = np.array([-4.0, 1j, -1j, 3 + 4j, complex(-9, -0.0)])
    arr = principal_sqrt(z)
    ref = np.array([principal_sqrt(complex(v)) for v in z])
    # numpy and cmath may round the last bit differently
    assert np.allclose(arr, ref, rtol=1e-15, atol=0)
    assert np.all(arr.real >= 0)


@given(x=st.floats(-1e6, 1e6), y=st.floats(-1e6, 1e6))
def test_principal_sqrt_branch(x, y):
    z = complex(x, y)
    w = principal_sqrt(z)
    assert abs(w * w - z) <= 1e-14 * max(abs(z), 1e-300) + 1e-300
    assert w.real >= 0
    if w.real == 0:
        assert w.imag >= 0


@given(x=st.floats(-1e4, 1e4), y=st.floats(0.0, 1e4), dx=st.floats(-1e-6, 1e-6), dy=st.floats(0.0, 1e-6))
def test_principal_sqrt_continuous_on_upper_half_plane(x, y, dx, dy):
    a = principal_sqrt(complex(x, y))
    b = principal_sqrt(complex(x + dx, y + dy))
    # |sqrt(z1) - sqrt(z2)| <= sqrt|z1 - z2| on a half-plane
    assert abs(a - b) <= math.sqrt(abs(complex(dx, dy))) + 1e-9


@settings(max_examples=200)
@given(omega=omegas, r=dampings, gamma=st.floats(0.0, 1e-1))
def test_coefficient_invariants(omega, r, gamma):
    c = compute_eta(PhysicalParams(omega, r, gamma))
    assert abs(c.sqrt_eta**2 - c.eta) <= 1e-14 * abs(c.eta)
    assert c.eta.imag >= 0
    assert c.sqrt_eta.real >= 0
    assert c.s == c.sqrt_eta
    expected = -(omega**2) * (1 - 1j * r / omega) / (1 + 1j * gamma * omega)
    assert abs(c.eta - expected) <= 1e-14 * abs(expected)


@given(omega=omegas, r=st.floats(1e-6, 1e2))
def test_first_order_expansion(omega, r):
    c = compute_eta(PhysicalParams(omega, r=r))
    assert c.eta == complex(-(omega**2), omega * r)


@given(omega=omegas, gamma=gammas)
def test_viscoelastic_parts(omega, gamma):
    c = compute_eta(PhysicalParams(omega, gamma=gamma))
    d = 1 + omega**2 * gamma**2
    assert c.eta.imag == pytest.approx(omega**3 * gamma / d, rel=1e-13)
    assert c.eta.real == pytest.approx(-(omega**2) / d, rel=1e-13)
    assert imag_real_ratio(PhysicalParams(omega, gamma=gamma)) == pytest.approx(-omega * gamma, rel=1e-12)


@given(omega=omegas, r=st.floats(1e-6, 1e2))
def test_first_order_ratio(omega, r):
    assert imag_real_ratio(PhysicalParams(omega, r=r)) == pytest.approx(-r / omega, rel=1e-12)


@pytest.mark.parametrize(
    "params, expected",
    [
        (PhysicalParams(100.0, gamma=1e-4), -0.01),
        (PhysicalParams(100.0, r=1.0), -0.01),
        (PhysicalParams(50.0, gamma=0.003), -0.15),
    ],
)
def test_ratio_examples(params, expected):
    assert abs(imag_real_ratio(params) - expected) <= 1e-12


@pytest.mark.parametrize("params", [PhysicalParams(100.0), PhysicalParams(100.0, r=1.0, gamma=1e-4)])
def test_ratio_needs_single_mechanism(params):
    with pytest.raises(ValueError):
        imag_real_ratio(params)


def test_gamma_mimics_r():
    a = compute_eta(PhysicalParams(100.0, gamma=1e-4)).eta
    b = compute_eta(PhysicalParams(100.0, r=1.0)).eta
    assert abs(a - b) / abs(b) < 1e-3


def test_approx_small():
    p = PhysicalParams(100.0, gamma=1e-4)
    approx = zeroth_order_approx(p, "small")
    assert approx == complex(10000.0, -100.0)
    exact = 100.0**2 / (1 + 1j * 100.0 * 1e-4)
    rel = abs(approx - exact) / abs(exact)
    assert rel == pytest.approx(1e-4, rel=1e-2)
    assert rel <= 1e-3


def test_approx_unit():
    approx = zeroth_order_approx(PhysicalParams(100.0, gamma=1e-2), "unit")
    assert abs(approx - 0.5e4 * (1 - 1j)) < 1e-9


def test_approx_large():
    approx = zeroth_order_approx(PhysicalParams(100.0, gamma=1.0), "large")
    assert abs(approx - (1 - 100j)) < 1e-12


def test_approx_regime_mismatch_warns_only():
    with pytest.warns(RegimeWarning):
        v = zeroth_order_approx(PhysicalParams(100.0, gamma=1.0), "small")
    assert v == complex(1e4, -1e6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        # within the documented factor: no warning
        zeroth_order_approx(PhysicalParams(100.0, gamma=1e-3), "unit")


def test_approx_rejects_bad_input():
    with pytest.raises(ValueError):
        zeroth_order_approx(PhysicalParams(100.0), "small")
    with pytest.raises(ValueError):
        zeroth_order_approx(PhysicalParams(100.0, gamma=1e-4), "tiny")
