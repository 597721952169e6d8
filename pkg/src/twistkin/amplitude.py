"""Exact two-configuration twisted amplitude and cross-section density."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateBoundary, EnergyMismatch, OutsideAnnulus, PhysicsError
from .kinematics import (
    AtomBeam,
    BesselMode,
    TransferVector,
    TriangleGeometry,
    default_eps_boundary,
    detuning_from_transfer,
    triangle_geometry,
)

KINDS = ("constant", "relative_phase", "user_table")


def _wrap_pm_pi(x: float) -> float:
    """Map to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


@dataclass(frozen=True)
class PWAmplitudeModel:
    """Plane-wave amplitudes M_a, M_b of the two interfering configurations.

    ``user_table`` holds M_a and M_b sampled on a uniform azimuth grid over
    [0, 2*pi); values in between come from trigonometric (FFT) interpolation,
    so the tabulated model is a smooth periodic function of phi_K.
    """

    kind: str = "constant"
    m0: complex = 1.0 + 0.0j
    phase_ab: float = 0.0
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PhysicsError(f"amplitude kind in {KINDS}", f"kind={self.kind!r}")
        object.__setattr__(self, "m0", complex(self.m0))
        if self.kind == "user_table":
            if self.table is None:
                raise PhysicsError("user_table model needs a table")
            ma = np.asarray(self.table[0], dtype=complex)
            mb = np.asarray(self.table[1], dtype=complex)
            if ma.shape != mb.shape or ma.ndim != 1 or ma.size < 1:
                raise PhysicsError("table M_a and M_b are equal-length 1-d sequences")
            object.__setattr__(self, "table", (ma, mb))

    @classmethod
    def constant(cls, m0: complex = 1.0) -> "PWAmplitudeModel":
        return cls("constant", m0=m0)

    @classmethod
    def relative_phase(cls, phase_ab: float, m0: complex = 1.0) -> "PWAmplitudeModel":
        return cls("relative_phase", m0=m0, phase_ab=phase_ab)

    @classmethod
    def user_table(cls, ma, mb) -> "PWAmplitudeModel":
        return cls("user_table", table=(ma, mb))

    @property
    def phi_independent(self) -> bool:
        return self.kind != "user_table"

    @property
    def table_size(self) -> int:
        return 0 if self.table is None else self.table[0].size

    def amplitudes(self, phi_k):
        """(M_a, M_b) at azimuth(s) phi_k; arrays when phi_k is an array."""
        phi = np.asarray(phi_k, dtype=float)
        if self.kind == "constant":
            ma = mb = np.full(phi.shape, self.m0)
        elif self.kind == "relative_phase":
            ma = np.full(phi.shape, self.m0)
            mb = np.full(phi.shape, self.m0 * cmath.exp(1j * self.phase_ab))
        else:
            ma = _trig_interp(self.table[0], phi)
            mb = _trig_interp(self.table[1], phi)
        if phi.ndim == 0:
            return complex(ma), complex(mb)
        return ma, mb

    def bound(self) -> float:
        """Upper bound of |M_a| + |M_b| over all azimuths."""
        if self.kind != "user_table":
            ma, mb = self.amplitudes(0.0)
            return abs(ma) + abs(mb)
        ma, mb = self.table
        # Fourier coefficients bound the interpolant
        return float(np.sum(np.abs(np.fft.fft(ma))) + np.sum(np.abs(np.fft.fft(mb)))) / ma.size


def _trig_interp(values: np.ndarray, phi: np.ndarray) -> np.ndarray:
    n = values.size
    if n == 1:
        return np.full(phi.shape, values[0], dtype=complex)
    coef = np.fft.fft(values) / n
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        # split the Nyquist term symmetrically so real tables stay real
        nyq = n // 2
        coef = np.append(coef, coef[nyq] / 2)
        coef[nyq] /= 2
        freqs = np.append(freqs, nyq)
        freqs[nyq] = -nyq
    return np.exp(1j * np.multiply.outer(phi, freqs)) @ coef


@dataclass(frozen=True)
class TwistedAmplitude:
    value: complex
    phase_a: float
    phase_b: float
    boundary_flag: bool = False

    @property
    def phase(self) -> float:
        return _wrap_pm_pi(cmath.phase(self.value))


def fringe_phase(m1: int, m2: int, geom: TriangleGeometry) -> float:
    return m1 * geom.delta1 + m2 * geom.delta2


def fringe_function(m1: int, m2: int, geom: TriangleGeometry) -> float:
    """cos^2(m1*delta1 + m2*delta2)."""
    return math.cos(fringe_phase(m1, m2, geom)) ** 2


def twisted_amplitude(
    b1: BesselMode,
    b2: BesselMode,
    K: TransferVector,
    model: PWAmplitudeModel,
    eps_boundary: float | None = None,
) -> TwistedAmplitude:
    """Exact amplitude of two Bessel photons for momentum transfer K.

    J = exp(i(m1-m2)phi_K) * kappa1*kappa2/(2*area)
        * [M_a exp(i Phi) + M_b exp(-i Phi)],   Phi = m1*delta1 + m2*delta2
    """
    geom = triangle_geometry(b1.kappa, b2.kappa, K.k_perp, eps_boundary)
    if geom.degenerate:
        raise DegenerateBoundary(
            f"k_perp={K.k_perp!r} on the annulus boundary; area={geom.area!r}"
        )
    ma, mb = model.amplitudes(K.phi_k)
    big_phi = fringe_phase(b1.m, b2.m, geom)
    glob = (b1.m - b2.m) * K.phi_k
    pref = b1.kappa * b2.kappa / (2.0 * geom.area)
    value = cmath.exp(1j * glob) * pref * (ma * cmath.exp(1j * big_phi) + mb * cmath.exp(-1j * big_phi))
    phase_a = _wrap_pm_pi(glob + big_phi + (cmath.phase(ma) if ma else 0.0))
    phase_b = _wrap_pm_pi(glob - big_phi + (cmath.phase(mb) if mb else 0.0))
    return TwistedAmplitude(value, phase_a, phase_b, False)


def amplitude_sq(b1: BesselMode, b2: BesselMode, k_perp, phi_k, model: PWAmplitudeModel):
    """Vectorized |J|^2 and envelope (kappa1*kappa2/2*area)^2 (|M_a|+|M_b|)^2.

    No annulus check; callers restrict ``k_perp`` to the trimmed annulus.
    """
    k_perp = np.asarray(k_perp, dtype=float)
    ma, mb = model.amplitudes(np.broadcast_to(np.asarray(phi_k, dtype=float), k_perp.shape))
    return kernels.amp_sq_batch(b1.kappa, b2.kappa, k_perp, b1.m, b2.m, ma, mb)


def xsec_density(
    b1: BesselMode,
    b2: BesselMode,
    K: TransferVector,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    eps_boundary: float | None = None,
    energy_tol: float | None = None,
    check_energy: bool = True,
) -> float:
    """Unnormalized d(sigma)/d^2K_perp = |J|^2; zero outside the annulus.

    Energy conservation is checked first: the detuning implied by K must
    match omega1 + omega2 - E_exc.
    """
    if check_energy:
        kz = b1.kz + b2.kz
        if abs(K.kz - kz) > 1e-12 * max(abs(b1.kz) + abs(b2.kz), 1e-300):
            raise EnergyMismatch(f"K.kz={K.kz!r} differs from k1z + k2z = {kz!r}")
        run_delta = b1.omega + b2.omega - atom.e_exc
        k_delta = detuning_from_transfer(atom, K)
        if energy_tol is None:
            energy_tol = max(
                1e-9 * abs(k_delta),
                64 * np.finfo(float).eps * (b1.omega + b2.omega + atom.e_exc),
            )
        if abs(run_delta - k_delta) > energy_tol:
            raise EnergyMismatch(
                f"omega1+omega2-E_exc={run_delta!r} but K requires detuning {k_delta!r}"
            )
    eps = default_eps_boundary(b1.kappa, b2.kappa) if eps_boundary is None else eps_boundary
    lo, hi = abs(b1.kappa - b2.kappa), b1.kappa + b2.kappa
    if K.k_perp < lo - eps or K.k_perp > hi + eps:
        return 0.0
    return abs(twisted_amplitude(b1, b2, K, model, eps_boundary).value) ** 2


__all__ = [
    "PWAmplitudeModel",
    "TwistedAmplitude",
    "amplitude_sq",
    "fringe_function",
    "fringe_phase",
    "twisted_amplitude",
    "xsec_density",
    "OutsideAnnulus",
]
