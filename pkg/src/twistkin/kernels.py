"""Backend selection for the hot kernels.

The compiled extension ``twistkin._native`` is used when it imports;
otherwise the numpy implementation in ``twistkin._kernels_py`` takes over.
:func:`use_backend` switches explicitly (benchmarks and parity tests).
"""

from . import _kernels_py

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

_impl = _native if _native is not None else _kernels_py
BACKEND = "cython" if _native is not None else "python"


def available_backends():
    return ["cython", "python"] if _native is not None else ["python"]


def use_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _impl, BACKEND
    previous = BACKEND
    if name == "cython":
        if _native is None:
            raise ImportError("compiled extension twistkin._native is not built")
        _impl = _native
    elif name == "python":
        _impl = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous


def triangle_batch(kappa1, kappa2, kperp):
    return _impl.triangle_batch(float(kappa1), float(kappa2), kperp)


def amp_sq_batch(kappa1, kappa2, kperp, m1, m2, ma, mb):
    return _impl.amp_sq_batch(float(kappa1), float(kappa2), kperp, int(m1), int(m2), ma, mb)


def ring_quadrature(kappa1, kappa2, kx, ky, m1, m2, ma, mb, sigma, gh_x, gh_w, n_az):
    return _impl.ring_quadrature(
        float(kappa1), float(kappa2), float(kx), float(ky), int(m1), int(m2),
        complex(ma), complex(mb), float(sigma), gh_x, gh_w, int(n_az),
    )
