"""Brute-force checks of the closed-form twisted amplitude.

The radial delta functions of the Bessel Fourier amplitudes are replaced by
unit-area Gaussians of width ``sigma``; the transverse momentum delta
eliminates k2 = K - k1 and the remaining integral over k1 is done on a polar
grid.  As sigma -> 0 the result converges to :func:`twisted_amplitude`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import optimize

from . import kernels
from .amplitude import PWAmplitudeModel, twisted_amplitude
from .errors import DegenerateBoundary, NonConvergent, PhysicsError, RootFailure
from .kinematics import BesselMode, TransferVector, triangle_geometry, wrap_angle

MIN_AZIMUTHAL = 512


@dataclass(frozen=True)
class RingRegularization:
    sigma: float
    n_radial: int = 48
    n_azimuthal: int = MIN_AZIMUTHAL

    def __post_init__(self):
        if not self.sigma > 0:
            raise PhysicsError("ring sigma > 0", f"sigma={self.sigma!r}")
        if self.n_radial < 8:
            raise PhysicsError("n_radial >= 8", f"n_radial={self.n_radial!r}")
        if self.n_azimuthal < MIN_AZIMUTHAL:
            raise PhysicsError(f"n_azimuthal >= {MIN_AZIMUTHAL}", f"n_azimuthal={self.n_azimuthal!r}")

    def is_narrow(self, kappa1: float, kappa2: float) -> bool:
        """Whether sigma is small enough to claim agreement with the exact amplitude."""
        return self.sigma <= 0.01 * min(kappa1, kappa2)


def ring_profile(x, sigma: float):
    """Unit-area Gaussian standing in for delta(x)."""
    return np.exp(-0.5 * (np.asarray(x) / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def bessel_fourier_weight(kappa: float, m: int, k_perp_vec, reg: RingRegularization) -> complex:
    """Fourier amplitude of a Bessel mode with a Gaussian ring."""
    kx, ky = float(k_perp_vec[0]), float(k_perp_vec[1])
    phi = math.atan2(ky, kx)
    radial = float(ring_profile(math.hypot(kx, ky) - kappa, reg.sigma))
    return (-1j) ** m * cmath.exp(1j * m * phi) * math.sqrt(2.0 * math.pi / kappa) * radial


def weight_normalization(b1: BesselMode, b2: BesselMode) -> complex:
    # constant factors of the two Fourier weights (photon 2 enters with -m2)
    return (-1j) ** b1.m * (-1j) ** (-b2.m) * 2.0 * math.pi / math.sqrt(b1.kappa * b2.kappa)


def _n_azimuthal(kappa1: float, sigma: float, requested: int) -> int:
    # spacing must resolve the second ring, whose angular width is >= sigma / r
    r_max = kappa1 + 8.0 * sigma
    return max(requested, int(math.ceil(4.0 * math.pi * r_max / sigma)))


def _quadrature(b1, b2, K, model, sigma, n_radial, n_azimuthal) -> complex:
    gh_x, gh_w = np.polynomial.hermite.hermgauss(n_radial)
    ma, mb = model.amplitudes(K.phi_k)
    kx, ky = K.k_perp * math.cos(K.phi_k), K.k_perp * math.sin(K.phi_k)
    n_az = _n_azimuthal(b1.kappa, sigma, n_azimuthal)
    raw = kernels.ring_quadrature(b1.kappa, b2.kappa, kx, ky, b1.m, b2.m, ma, mb, sigma, gh_x, gh_w, n_az)
    # kernel integrates g1*g2*exp(i(m1 phi1 - m2 phi2))*M, i.e. the product of
    # Fourier weights divided by their constant factors
    return complex(raw)


def ring_quadrature_amplitude(
    b1: BesselMode,
    b2: BesselMode,
    K: TransferVector,
    model: PWAmplitudeModel,
    reg: RingRegularization,
    tol: float | None = None,
) -> complex:
    """Numerical twisted amplitude on the same normalization as the exact one.

    Parameters
    ----------
    tol : float, optional
        If given, the quadrature is repeated with doubled azimuthal and
        increased radial resolution; a relative change above ``tol`` raises
        :class:`NonConvergent`.
    """
    k1, k2 = b1.kappa, b2.kappa
    margin = 5.0 * reg.sigma
    lo, hi = abs(k1 - k2), k1 + k2
    if not (lo + margin <= K.k_perp <= hi - margin):
        raise PhysicsError(
            "K_perp inside the annulus with margin >= 5 sigma",
            f"k_perp={K.k_perp!r}, annulus=[{lo!r}, {hi!r}], sigma={reg.sigma!r}",
        )
    value = _quadrature(b1, b2, K, model, reg.sigma, reg.n_radial, reg.n_azimuthal)
    if tol is not None:
        n_az = _n_azimuthal(k1, reg.sigma, reg.n_azimuthal)
        finer = _quadrature(b1, b2, K, model, reg.sigma, reg.n_radial + 16, 2 * n_az)
        if abs(finer - value) > tol * max(abs(finer), 1e-300):
            raise NonConvergent(f"refinement changed the amplitude by {abs(finer - value)!r}")
        value = finer
    return value


@dataclass(frozen=True)
class ConvergenceRow:
    sigma: float
    abs_numeric: float
    abs_analytic: float
    ratio: float
    phase_diff: float


def convergence_table(b1, b2, K, model, sigmas, n_radial: int = 48) -> List[ConvergenceRow]:
    exact = twisted_amplitude(b1, b2, K, model).value
    rows = []
    for s in sigmas:
        num = ring_quadrature_amplitude(b1, b2, K, model, RingRegularization(s, n_radial))
        if abs(exact) > 0 and abs(num) > 0:
            dphase = math.remainder(cmath.phase(num) - cmath.phase(exact), 2.0 * math.pi)
        else:
            dphase = float("nan")
        ratio = abs(num) / abs(exact) if abs(exact) > 0 else float("inf")
        rows.append(ConvergenceRow(float(s), abs(num), abs(exact), ratio, dphase))
    return rows


def convergence_order(rows: List[ConvergenceRow]) -> float:
    """Observed order p from |ratio - 1| under successive sigma halving (least squares in log-log)."""
    s = np.array([r.sigma for r in rows])
    err = np.array([abs(r.ratio - 1.0) for r in rows])
    ok = err > 0
    if ok.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(s[ok]), np.log(err[ok]), 1)
    return float(slope)


def root_find_configs(
    kappa1: float, kappa2: float, K: TransferVector, xtol: float = 1e-14
) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Solve kappa1*n(phi1) + kappa2*n(phi2) = K_perp by bisection in phi1.

    |K - kappa1 n(phi1)| grows monotonically as phi1 moves away from phi_K,
    so each half-turn brackets exactly one root.  The root with
    phi1 > phi_K is configuration a.
    """
    geom = triangle_geometry(kappa1, kappa2, K.k_perp)
    if geom.degenerate:
        raise DegenerateBoundary("root finding needs a non-degenerate triangle")
    kx, ky = K.k_perp * math.cos(K.phi_k), K.k_perp * math.sin(K.phi_k)

    def residual(phi1):
        return math.hypot(kx - kappa1 * math.cos(phi1), ky - kappa1 * math.sin(phi1)) - kappa2

    def solve(a, b):
        fa, fb = residual(a), residual(b)
        if not (fa < 0 < fb or fb < 0 < fa):
            raise RootFailure(f"no sign change on [{a!r}, {b!r}]: f=({fa!r}, {fb!r})")
        phi1 = optimize.bisect(residual, a, b, xtol=xtol, maxiter=200)
        phi2 = math.atan2(ky - kappa1 * math.sin(phi1), kx - kappa1 * math.cos(phi1))
        return wrap_angle(phi1), wrap_angle(phi2)

    phi_k = K.phi_k
    conf_a = solve(phi_k, phi_k + math.pi)
    conf_b = solve(phi_k - math.pi, phi_k)
    return conf_a, conf_b
