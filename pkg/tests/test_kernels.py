import numpy as np
import pytest

from twistkin import _kernels_py, kernels
from twistkin.kinematics import triangle_geometry

needs_native = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")


@pytest.fixture
def inputs():
    rng = np.random.default_rng(3)
    k1, k2 = 0.3, 0.17
    kp = np.linspace(abs(k1 - k2), k1 + k2, 2001)[1:-1]
    ma = rng.normal(size=kp.size) + 1j * rng.normal(size=kp.size)
    mb = rng.normal(size=kp.size) + 1j * rng.normal(size=kp.size)
    return k1, k2, kp, ma, mb


def test_python_triangle_matches_scalar(inputs):
    k1, k2, kp, _, _ = inputs
    area, d1, d2 = _kernels_py.triangle_batch(k1, k2, kp)
    for i in range(0, kp.size, 97):
        g = triangle_geometry(k1, k2, kp[i])
        assert area[i] == pytest.approx(g.area, rel=1e-12)
        assert d1[i] == pytest.approx(g.delta1, rel=1e-12)
        assert d2[i] == pytest.approx(g.delta2, rel=1e-12)


@needs_native
def test_backend_parity(inputs):
    from twistkin import _native

    k1, k2, kp, ma, mb = inputs
    for a, b in zip(_native.triangle_batch(k1, k2, kp), _kernels_py.triangle_batch(k1, k2, kp)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)
    for a, b in zip(_native.amp_sq_batch(k1, k2, kp, 4, -3, ma, mb), _kernels_py.amp_sq_batch(k1, k2, kp, 4, -3, ma, mb)):
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=0)
    x, w = np.polynomial.hermite.hermgauss(24)
    r1 = _native.ring_quadrature(k1, k2, 0.2, 0.1, 2, -1, 1 + 0j, 0.5j, 1e-3, x, w, 4096)
    r2 = _kernels_py.ring_quadrature(k1, k2, 0.2, 0.1, 2, -1, 1 + 0j, 0.5j, 1e-3, x, w, 4096)
    assert abs(r1 - r2) <= 1e-10 * abs(r2)


def test_use_backend_round_trip():
    prev = kernels.use_backend("python")
    try:
        assert kernels.BACKEND == "python"
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")
    finally:
        kernels.use_backend(prev)
    assert kernels.BACKEND == prev
