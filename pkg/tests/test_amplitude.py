import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistkin import (
    AtomBeam,
    BesselMode,
    PWAmplitudeModel,
    TransferVector,
    fringe_function,
    triangle_geometry,
    twisted_amplitude,
    xsec_density,
)
from twistkin.amplitude import amplitude_sq
from twistkin.errors import DegenerateBoundary, EnergyMismatch, PhysicsError

from conftest import arccos_angles, heron


def modes(k1, k2, m1, m2, omega=10.0):
    return BesselMode.photon(omega, k1, m1, 1), BesselMode.photon(omega, k2, m2, -1)


def test_isosceles_m0_is_two():
    b1, b2 = modes(1, 1, 0, 0)
    J = twisted_amplitude(b1, b2, TransferVector(math.sqrt(2), 0.0), PWAmplitudeModel.constant())
    assert J.value == pytest.approx(2.0, rel=1e-14)
    assert J.value.imag == pytest.approx(0.0, abs=1e-14)


def test_three_four_five_zero():
    b1, b2 = modes(3, 4, 1, 1)
    J = twisted_amplitude(b1, b2, TransferVector(5.0, 0.3), PWAmplitudeModel.constant())
    assert abs(J.value) < 1e-14


@pytest.mark.parametrize("phi", [0.0, 0.4, 2.5, 5.9])
def test_global_phase_winding(phi):
    b1, b2 = modes(1, 1, 1, 0)
    J = twisted_amplitude(b1, b2, TransferVector(math.sqrt(2), phi), PWAmplitudeModel.constant())
    assert J.value == pytest.approx(math.sqrt(2) * cmath.exp(1j * phi), rel=1e-13, abs=1e-13)


def test_fringe_function_examples():
    assert fringe_function(0, 0, triangle_geometry(0.3, 0.5, 0.6)) == 1.0
    assert fringe_function(1, 1, triangle_geometry(3, 4, 5)) == pytest.approx(0.0, abs=1e-30)
    assert fringe_function(1, 0, triangle_geometry(1, 1, math.sqrt(2))) == pytest.approx(0.5)


def test_model_invariants():
    c = PWAmplitudeModel.constant(2 - 1j)
    assert c.amplitudes(0.3) == (2 - 1j, 2 - 1j)
    r = PWAmplitudeModel.relative_phase(0.7, 1.5)
    ma, mb = r.amplitudes(1.0)
    assert ma == 1.5 and mb == pytest.approx(1.5 * cmath.exp(0.7j))
    t = PWAmplitudeModel.user_table([1, 2, 3, 2], [1, 1, 1, 1])
    phis = 2 * math.pi * np.arange(4) / 4
    ma, mb = t.amplitudes(phis)
    np.testing.assert_allclose(ma, [1, 2, 3, 2], atol=1e-13)
    assert t.bound() >= np.max(np.abs(t.amplitudes(np.linspace(0, 6.3, 500))[0])) + 1 - 1e-12
    assert not t.phi_independent and c.phi_independent


kap = st.floats(0.05, 5.0)
ms = st.integers(-12, 12)


@given(kap, kap, st.floats(0.02, 0.98), st.floats(0, 2 * math.pi), ms, ms,
       st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_constant_model_closed_form(k1, k2, u, phi, m1, m2, m0):
    lo, hi = abs(k1 - k2), k1 + k2
    kp = lo + u * (hi - lo)
    b1, b2 = modes(k1, k2, m1, m2)
    J = twisted_amplitude(b1, b2, TransferVector(kp, phi), PWAmplitudeModel.constant(m0))
    # independent route: plain Heron area and arccos angles
    d1, d2 = arccos_angles(k1, k2, kp)
    area = heron(k1, k2, kp)
    expect = k1 * k2 / area * abs(m0 * math.cos(m1 * d1 + m2 * d2))
    assert abs(J.value) == pytest.approx(expect, rel=1e-7, abs=1e-9 * k1 * k2 / area * abs(m0))


@given(kap, kap, st.floats(0.02, 0.98), st.floats(0, 2 * math.pi), ms, ms)
def test_conjugation_symmetry(k1, k2, u, phi, m1, m2):
    kp = abs(k1 - k2) + u * 2 * min(k1, k2)
    model = PWAmplitudeModel.constant()
    a = twisted_amplitude(*modes(k1, k2, m1, m2), TransferVector(kp, phi), model)
    b = twisted_amplitude(*modes(k1, k2, -m1, -m2), TransferVector(kp, phi), model)
    assert abs(a.value) == pytest.approx(abs(b.value), rel=1e-12, abs=1e-12 * abs(a.value) + 1e-300)
    ga = a.value * cmath.exp(-1j * (m1 - m2) * phi)
    gb = b.value * cmath.exp(1j * (m1 - m2) * phi)
    assert ga == pytest.approx(gb.conjugate(), rel=1e-9, abs=1e-9 * abs(ga) + 1e-12)


@given(kap, kap, st.floats(0.02, 0.98), ms, ms, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_phi_independent_magnitude(k1, k2, u, m1, m2, p1, p2):
    kp = abs(k1 - k2) + u * 2 * min(k1, k2)
    model = PWAmplitudeModel.relative_phase(0.9, 1 + 2j)
    b1, b2 = modes(k1, k2, m1, m2)
    a = abs(twisted_amplitude(b1, b2, TransferVector(kp, p1), model).value)
    b = abs(twisted_amplitude(b1, b2, TransferVector(kp, p2), model).value)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@given(ms, ms, st.integers(-5, 5), kap, kap, st.floats(0.02, 0.98))
def test_m_parity(m1, m2, shift, k1, k2, u):
    kp = abs(k1 - k2) + u * 2 * min(k1, k2)
    g = triangle_geometry(k1, k2, kp)
    phase = m1 * g.delta1 + m2 * g.delta2
    assert fringe_function(m1, m2, g) == pytest.approx(math.cos(abs(phase) + shift * math.pi) ** 2, abs=1e-9)
    assert fringe_function(m1, m2, g) == pytest.approx(fringe_function(-m1, -m2, g), abs=1e-15)


@pytest.mark.parametrize("k1,k2,m1,m2", [(1.0, 0.7, 2, -3), (0.4, 0.4, 5, 5)])
def test_degenerate_limit(k1, k2, m1, m2):
    b1, b2 = modes(k1, k2, m1, m2)
    ma, mb = 1.0 + 0.5j, 0.3 - 1j
    model = PWAmplitudeModel.user_table([ma], [mb])
    hi = k1 + k2
    vals = []
    for e in (1e-4, 1e-7, 1e-10, 1e-13):
        kp = hi * (1 - e)
        g = triangle_geometry(k1, k2, kp, eps_boundary=0.0)
        J = twisted_amplitude(b1, b2, TransferVector(kp, 0.0), model, eps_boundary=0.0)
        vals.append(abs(J.value) * g.area)
    limit = k1 * k2 * abs(ma + mb) / 2
    errs = [abs(v - limit) for v in vals]
    # angles shrink like sqrt(e), so each step of 1e-3 gains about 30x
    assert errs[-1] < 1e-4 * limit
    assert all(a > 10 * b for a, b in zip(errs, errs[1:]))


def test_degenerate_raises():
    b1, b2 = modes(1, 1, 1, 1)
    with pytest.raises(DegenerateBoundary):
        twisted_amplitude(b1, b2, TransferVector(2.0), PWAmplitudeModel.constant())


def test_xsec_density_support_and_energy():
    b1, b2 = modes(0.1, 0.1, 1, 1, omega=1.0)
    atom = AtomBeam(1e10, (0, 0, 0), 2.0)
    model = PWAmplitudeModel.constant()
    K = TransferVector(0.25, 0.1, b1.kz + b2.kz)
    assert xsec_density(b1, b2, K, atom, model, check_energy=False) == 0.0
    kp = 0.13
    delta = kp * kp / (2 * atom.mass_i)
    atom_res = AtomBeam(1e10, (0, 0, 0), 2.0 - delta)
    K = TransferVector(kp, 0.4, b1.kz + b2.kz)
    d = xsec_density(b1, b2, K, atom_res, model)
    assert d == pytest.approx(abs(twisted_amplitude(b1, b2, K, model).value) ** 2)
    with pytest.raises(EnergyMismatch):
        xsec_density(b1, b2, K, atom, model)


@given(kap, kap, st.floats(0.02, 0.98), st.floats(0.02, 0.98), ms, ms)
def test_density_ratio_closed_form(k1, k2, ua, ub, m1, m2):
    lo, hi = abs(k1 - k2), k1 + k2
    a, b = lo + ua * (hi - lo), lo + ub * (hi - lo)
    b1, b2 = modes(k1, k2, m1, m2)
    model = PWAmplitudeModel.constant()
    ja = abs(twisted_amplitude(b1, b2, TransferVector(a), model).value) ** 2
    jb = abs(twisted_amplitude(b1, b2, TransferVector(b), model).value) ** 2
    da, db = heron(k1, k2, a), heron(k1, k2, b)
    pa, pb = (m1 * x + m2 * y for x, y in (arccos_angles(k1, k2, a), arccos_angles(k1, k2, b)))
    assert ja * (da * math.cos(pb)) ** 2 == pytest.approx(jb * (db * math.cos(pa)) ** 2, rel=1e-6, abs=1e-8 * (k1 * k2) ** 2)


def test_amplitude_sq_matches_scalar():
    b1, b2 = modes(0.3, 0.2, 3, -2)
    model = PWAmplitudeModel.user_table([1, 1j, -1], [0.5, 0.5, 0.2])
    kp = np.linspace(0.11, 0.49, 17)
    phi = np.linspace(0, 6, 17)
    amp, env = amplitude_sq(b1, b2, kp, phi, model)
    for i in range(kp.size):
        j = twisted_amplitude(b1, b2, TransferVector(kp[i], phi[i]), model).value
        assert amp[i] == pytest.approx(abs(j) ** 2, rel=1e-12)
        assert amp[i] <= env[i] * (1 + 1e-12)


def test_table_validation():
    with pytest.raises(PhysicsError):
        PWAmplitudeModel.user_table([1, 2], [1])
