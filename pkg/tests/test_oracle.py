import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistkin import (
    BesselMode,
    PWAmplitudeModel,
    RingRegularization,
    TransferVector,
    config_azimuths,
    convergence_table,
    ring_quadrature_amplitude,
    root_find_configs,
    triangle_geometry,
    twisted_amplitude,
)
from twistkin.errors import NonConvergent, PhysicsError
from twistkin.oracle import bessel_fourier_weight, convergence_order


def modes(k1, k2, m1, m2):
    return BesselMode.photon(10.0, k1, m1, 1), BesselMode.photon(10.0, k2, m2, -1)


def test_fourier_weight_profile():
    reg = RingRegularization(1e-2)
    on = bessel_fourier_weight(0.5, 0, (0.5, 0.0), reg)
    g0 = 1.0 / (math.sqrt(2 * math.pi) * reg.sigma)
    assert abs(on) == pytest.approx(math.sqrt(2 * math.pi / 0.5) * g0, rel=1e-14)
    off = bessel_fourier_weight(0.5, 0, (0.5 + 5 * reg.sigma, 0.0), reg)
    assert abs(off) / abs(on) == pytest.approx(math.exp(-12.5), rel=1e-12)


def test_isosceles_quadrature():
    b1, b2 = modes(1, 1, 0, 0)
    val = ring_quadrature_amplitude(b1, b2, TransferVector(math.sqrt(2)), PWAmplitudeModel.constant(),
                                    RingRegularization(1e-3))
    assert abs(val) == pytest.approx(2.0, rel=1e-2)


def test_three_four_five_numeric_zero():
    b1, b2 = modes(3, 4, 1, 1)
    val = ring_quadrature_amplitude(b1, b2, TransferVector(5 * (1 - 1e-9) - 1e-2), PWAmplitudeModel.constant(),
                                    RingRegularization(1e-3))
    g = triangle_geometry(3, 4, 5 - 1e-2)
    scale = 3 * 4 / (2 * g.area)
    assert abs(val) <= 0.05 * scale


def test_convergence_order_and_phase():
    b1, b2 = modes(0.1, 0.08, 3, -2)
    K = TransferVector(0.12, 1.1)
    s0 = 1e-3 * 0.08
    rows = convergence_table(b1, b2, K, PWAmplitudeModel.relative_phase(0.4), [8 * s0, 4 * s0, 2 * s0, s0])
    errs = [abs(r.ratio - 1) for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert convergence_order(rows) >= 0.9
    assert all(abs(r.phase_diff) < 0.02 for r in rows)
    assert 0.99 <= rows[-1].ratio <= 1.01


def test_margin_and_validation():
    b1, b2 = modes(1, 1, 0, 0)
    with pytest.raises(PhysicsError):
        ring_quadrature_amplitude(b1, b2, TransferVector(1.999), PWAmplitudeModel.constant(), RingRegularization(1e-3))
    with pytest.raises(PhysicsError):
        RingRegularization(0.0)
    with pytest.raises(PhysicsError):
        RingRegularization(1e-3, n_azimuthal=100)
    assert RingRegularization(1e-3).is_narrow(0.1, 0.2)
    assert not RingRegularization(1e-2).is_narrow(0.1, 0.2)


def test_refinement_tolerance():
    b1, b2 = modes(1, 1, 1, 1)
    K = TransferVector(1.2)
    reg = RingRegularization(1e-2, n_radial=8, n_azimuthal=512)
    ring_quadrature_amplitude(b1, b2, K, PWAmplitudeModel.constant(), reg, tol=1e-2)
    with pytest.raises(NonConvergent):
        ring_quadrature_amplitude(b1, b2, K, PWAmplitudeModel.constant(), reg, tol=1e-16)


def test_root_find_examples():
    a, b = root_find_configs(1, 1, TransferVector(math.sqrt(2), 0.0))
    q = math.pi / 4
    assert a == pytest.approx((q, 2 * math.pi - q), abs=1e-12)
    assert b == pytest.approx((2 * math.pi - q, q), abs=1e-12)
    a, b = root_find_configs(3, 4, TransferVector(5.0, 0.0))
    assert a[0] == pytest.approx(math.acos(0.6), abs=1e-12)
    assert b[0] == pytest.approx(2 * math.pi - math.acos(0.6), abs=1e-12)


def test_root_find_near_degenerate():
    kp = 2.0 * (1 - 1e-6)
    a, b = root_find_configs(1, 1, TransferVector(kp, 0.3))
    sep = abs(math.remainder(a[0] - b[0], 2 * math.pi))
    assert 0 < sep < 1e-2


kap = st.floats(0.05, 5.0)


@given(kap, kap, st.floats(0.02, 0.98), st.floats(0, 2 * math.pi))
def test_roots_match_closed_form(k1, k2, u, phi):
    kp = abs(k1 - k2) + u * 2 * min(k1, k2)
    K = TransferVector(kp, phi)
    roots = root_find_configs(k1, k2, K)
    closed = config_azimuths(triangle_geometry(k1, k2, kp), K.phi_k)
    for r, c in zip(roots, closed):
        for x, y in zip(r, c):
            assert abs(math.remainder(x - y, 2 * math.pi)) < 1e-8


@settings(max_examples=8)
@given(st.floats(0.05, 0.15), st.floats(0.05, 0.15), st.floats(0.1, 0.9), st.integers(-4, 4), st.integers(-4, 4))
def test_oracle_property(k1, k2, u, m1, m2):
    lo, hi = abs(k1 - k2), k1 + k2
    kp = lo + 0.05 * (hi - lo) + u * 0.9 * (hi - lo)
    b1, b2 = modes(k1, k2, m1, m2)
    K = TransferVector(kp, 0.7)
    exact = twisted_amplitude(b1, b2, K, PWAmplitudeModel.constant()).value
    g = triangle_geometry(k1, k2, kp)
    scale = k1 * k2 / (2 * g.area)
    num = ring_quadrature_amplitude(b1, b2, K, PWAmplitudeModel.constant(), RingRegularization(2e-3 * min(k1, k2)))
    assert abs(num - exact) <= 2e-2 * scale
