"""Kinematics of two-Bessel-photon absorption.

Natural units (hbar = c = 1); every energy, momentum and mass is in eV.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import NoSolution, OutsideAnnulus, PhysicsError, SignConventionWarning

TWO_PI = 2.0 * math.pi


def wrap_angle(phi):
    """Map an angle (or array of angles) to [0, 2*pi)."""
    out = np.mod(phi, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class BesselMode:
    """One twisted participant on a cone: fixed kz and transverse radius kappa.

    ``mass`` is zero for photons.  For massive modes the dispersion relation
    depends on the run-level relativistic flag, see :meth:`check_dispersion`.
    """

    omega: float
    kz: float
    kappa: float
    m: int
    mass: float = 0.0

    def __post_init__(self):
        for name in ("omega", "kz", "kappa", "mass"):
            if not math.isfinite(getattr(self, name)):
                raise PhysicsError(f"{name} finite")
        if self.kappa < 0:
            raise PhysicsError("kappa >= 0", f"kappa={self.kappa!r}")
        if self.mass < 0:
            raise PhysicsError("mass >= 0", f"mass={self.mass!r}")
        if int(self.m) != self.m:
            raise PhysicsError("m integer", f"m={self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if self.mass == 0.0:
            lhs = self.omega**2
            rhs = self.kz**2 + self.kappa**2
            if abs(lhs - rhs) > 1e-12 * max(lhs, rhs, 1e-300):
                raise PhysicsError(
                    "photon dispersion omega^2 = kz^2 + kappa^2",
                    f"omega^2={lhs!r}, kz^2+kappa^2={rhs!r}",
                )

    @classmethod
    def photon(cls, omega: float, kappa: float, m: int, direction: int = 1) -> "BesselMode":
        """Photon with kz = direction * sqrt(omega^2 - kappa^2)."""
        if kappa > omega:
            raise PhysicsError("kappa <= omega for a photon", f"kappa={kappa!r}, omega={omega!r}")
        kz = math.copysign(math.sqrt((omega - kappa) * (omega + kappa)), direction)
        return cls(omega=omega, kz=kz, kappa=kappa, m=m)

    def check_dispersion(self, relativistic: bool, rtol: float = 1e-12) -> None:
        if self.mass == 0.0:
            return
        p2 = self.kz**2 + self.kappa**2
        if relativistic:
            expected = math.sqrt(self.mass**2 + p2)
        else:
            expected = self.mass + p2 / (2.0 * self.mass)
        if abs(self.omega - expected) > rtol * expected:
            kind = "relativistic" if relativistic else "non-relativistic"
            raise PhysicsError(f"{kind} dispersion of massive mode", f"omega={self.omega!r}, expected {expected!r}")


@dataclass(frozen=True)
class AtomBeam:
    """Initial atom as a plane wave.

    ``beta`` is |p| / mass_i.  The ``relativistic`` flag selects the dispersion
    relation for the whole run.
    """

    mass_i: float
    p: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    e_exc: float = 1.0
    relativistic: bool = False

    def __post_init__(self):
        p = tuple(float(c) for c in self.p)
        if len(p) != 3:
            raise PhysicsError("p is a 3-vector")
        object.__setattr__(self, "p", p)
        if not (self.mass_i > 0):
            raise PhysicsError("mass_i > 0", f"mass_i={self.mass_i!r}")
        if not (self.e_exc > 0):
            raise PhysicsError("E_exc > 0", f"e_exc={self.e_exc!r}")
        if self.relativistic and not (self.beta < 1.0):
            raise PhysicsError("beta = |p|/mass_i < 1 for relativistic atoms", f"beta={self.beta!r}")

    @property
    def mass_f(self) -> float:
        return self.mass_i + self.e_exc

    @property
    def p_abs(self) -> float:
        return math.sqrt(sum(c * c for c in self.p))

    @property
    def p_perp(self) -> float:
        return math.hypot(self.p[0], self.p[1])

    @property
    def phi_p(self) -> float:
        return math.atan2(self.p[1], self.p[0])

    @property
    def beta(self) -> float:
        return self.p_abs / self.mass_i

    @property
    def energy(self) -> float:
        p2 = self.p_abs**2
        if self.relativistic:
            return math.sqrt(self.mass_i**2 + p2)
        return self.mass_i + p2 / (2.0 * self.mass_i)

    @property
    def kinetic(self) -> float:
        """E_i - M_i without cancellation."""
        p2 = self.p_abs**2
        if self.relativistic:
            return p2 / (math.sqrt(self.mass_i**2 + p2) + self.mass_i)
        return p2 / (2.0 * self.mass_i)


@dataclass(frozen=True)
class TransferVector:
    """Momentum transfer K = p_f - p_i in cylindrical components."""

    k_perp: float
    phi_k: float = 0.0
    kz: float = 0.0

    def __post_init__(self):
        if not (self.k_perp >= 0):
            raise PhysicsError("k_perp >= 0", f"k_perp={self.k_perp!r}")
        object.__setattr__(self, "phi_k", wrap_angle(self.phi_k))

    @classmethod
    def from_cartesian(cls, kx: float, ky: float, kz: float) -> "TransferVector":
        return cls(math.hypot(kx, ky), math.atan2(ky, kx), kz)

    @property
    def cartesian(self) -> np.ndarray:
        return np.array(
            [self.k_perp * math.cos(self.phi_k), self.k_perp * math.sin(self.phi_k), self.kz]
        )


@dataclass(frozen=True)
class TriangleGeometry:
    kappa1: float
    kappa2: float
    k_perp: float
    area: float
    delta1: float
    delta2: float
    degenerate: bool = field(default=False)


def default_eps_boundary(kappa1: float, kappa2: float) -> float:
    return 1e-9 * (kappa1 + kappa2)


def triangle_area(a: float, b: float, c: float) -> float:
    # Kahan's ordering keeps Heron's formula accurate for needle triangles
    a, b, c = sorted((a, b, c), reverse=True)
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(prod) if prod > 0 else 0.0


def triangle_geometry(kappa1: float, kappa2: float, k_perp: float, eps_boundary: float | None = None) -> TriangleGeometry:
    """Triangle formed by the two transverse photon momenta and K_perp.

    ``delta1`` is the internal angle between the kappa1 side and K_perp,
    ``delta2`` the one between the kappa2 side and K_perp.

    Raises
    ------
    OutsideAnnulus
        If the triangle inequalities fail by more than ``eps_boundary``.
    """
    if not (kappa1 > 0 and kappa2 > 0):
        raise PhysicsError("kappa1 > 0 and kappa2 > 0", f"kappa1={kappa1!r}, kappa2={kappa2!r}")
    if not (k_perp >= 0):
        raise PhysicsError("k_perp >= 0", f"k_perp={k_perp!r}")
    eps = default_eps_boundary(kappa1, kappa2) if eps_boundary is None else eps_boundary
    lo = abs(kappa1 - kappa2)
    hi = kappa1 + kappa2
    if k_perp < lo - eps or k_perp > hi + eps:
        raise OutsideAnnulus(
            f"k_perp={k_perp!r} outside [{lo!r}, {hi!r}] for kappa=({kappa1!r}, {kappa2!r})"
        )
    degenerate = k_perp <= lo + eps or k_perp >= hi - eps
    area = 0.0 if degenerate else triangle_area(kappa1, kappa2, k_perp)
    if k_perp == 0.0:
        # kappa1 == kappa2, back-to-back photons; any split of pi works
        d1 = d2 = 0.5 * math.pi
    else:
        # atan2 form of the law of cosines: sin(d1) = 2*area/(kappa1*K)
        d1 = math.atan2(4.0 * area, kappa1 * kappa1 + k_perp * k_perp - kappa2 * kappa2)
        d2 = math.atan2(4.0 * area, kappa2 * kappa2 + k_perp * k_perp - kappa1 * kappa1)
    return TriangleGeometry(kappa1, kappa2, k_perp, area, d1, d2, degenerate)


def config_azimuths(geom: TriangleGeometry, phi_k: float):
    """Photon azimuths (phi1, phi2) of the two interfering plane-wave configurations."""
    a = (wrap_angle(phi_k + geom.delta1), wrap_angle(phi_k - geom.delta2))
    b = (wrap_angle(phi_k - geom.delta1), wrap_angle(phi_k + geom.delta2))
    return a, b


def _as_vector(K) -> np.ndarray:
    if isinstance(K, TransferVector):
        return K.cartesian
    return np.asarray(K, dtype=float)


def detuning_from_components(atom: AtomBeam, kx, ky, kz):
    """Vectorized :func:`detuning_from_transfer` on Cartesian components of K.

    Non-relativistic: (K^2 + 2 p.K) / 2M.  Relativistic: E_f - E_i - E_exc,
    rearranged so that no two energies of order M are subtracted.
    """
    kx, ky, kz = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (kx, ky, kz)))
    px, py, pz = atom.p
    q = kx * kx + ky * ky + kz * kz + 2.0 * (px * kx + py * ky + pz * kz)
    if not atom.relativistic:
        out = q / (2.0 * atom.mass_i)
    else:
        pf2 = (px + kx) ** 2 + (py + ky) ** 2 + (pz + kz) ** 2
        mf = atom.mass_f
        ef = np.sqrt(mf * mf + pf2)
        kin_f = pf2 / (ef + mf)
        out = (q - atom.e_exc * (kin_f + atom.kinetic)) / (ef + atom.energy)
    return out if out.ndim else float(out)


def detuning_from_transfer(atom: AtomBeam, K) -> float:
    """Detuning omega1 + omega2 - E_exc required to deliver momentum K."""
    k = _as_vector(K)
    return detuning_from_components(atom, k[0], k[1], k[2])


def kick_polar_angle(kz: float, atom: AtomBeam, delta: float) -> float:
    """Polar angle of the kick of an atom at rest: arccos(kz / sqrt(2 M delta))."""
    two_m_delta = 2.0 * atom.mass_i * delta
    if two_m_delta <= 0 or kz * kz > two_m_delta:
        raise NoSolution(f"2*M*delta={two_m_delta!r} < kz^2={kz * kz!r}")
    return math.acos(min(1.0, max(-1.0, kz / math.sqrt(two_m_delta))))


def detuning_window_rest(kappa1: float, kappa2: float, kz: float, mass: float) -> Tuple[float, float]:
    if not mass > 0:
        raise PhysicsError("M > 0", f"M={mass!r}")
    two_m = 2.0 * mass
    return ((kappa1 - kappa2) ** 2 + kz * kz) / two_m, ((kappa1 + kappa2) ** 2 + kz * kz) / two_m


def detuning_window_crossed(kappa1: float, kappa2: float, beta: float) -> Tuple[float, float]:
    if not 0 <= beta <= 1:
        raise PhysicsError("0 <= beta <= 1", f"beta={beta!r}")
    half = (kappa1 + kappa2) * beta
    return -half, half


@dataclass(frozen=True)
class PWReference:
    allowed: bool
    K: TransferVector
    mismatch: float


def pw_reference(atom: AtomBeam, k1, k2, omega1: float, omega2: float, tol: float | None = None) -> PWReference:
    """Plane-wave photons: momentum transfer is fixed, energy balance either holds or not."""
    k = np.asarray(k1, dtype=float) + np.asarray(k2, dtype=float)
    mismatch = omega1 + omega2 - atom.e_exc - detuning_from_transfer(atom, k)
    if tol is None:
        tol = 64 * np.finfo(float).eps * (abs(omega1) + abs(omega2) + atom.e_exc)
    return PWReference(abs(mismatch) <= tol, TransferVector.from_cartesian(*k), mismatch)


def check_sign_convention(b1: BesselMode, b2: BesselMode) -> bool:
    """Warn unless k1z > 0 > k2z.  The formulas do not depend on it."""
    ok = b1.kz > 0 and b2.kz < 0
    if not ok:
        warnings.warn(
            f"photon kz signs ({b1.kz!r}, {b2.kz!r}) differ from the k1z > 0 > k2z convention",
            SignConventionWarning,
            stacklevel=2,
        )
    return ok


def longitudinal_transfer(b1: BesselMode, b2: BesselMode) -> float:
    return b1.kz + b2.kz


# Energy-conservation circle in the transverse plane:
#   |K_perp + p_perp|^2 - p_perp^2 = Q(delta)
# The helpers below convert between detuning and Q without cancellation.

def transverse_q(atom: AtomBeam, delta, kz: float):
    delta = np.asarray(delta, dtype=float)
    pz = atom.p[2]
    if not atom.relativistic:
        q = 2.0 * atom.mass_i * delta
    else:
        ei = atom.energy
        q = 2.0 * atom.e_exc * atom.kinetic + 2.0 * (ei + atom.e_exc) * delta + delta * delta
    return q - kz * kz - 2.0 * pz * kz


def detuning_from_q(atom: AtomBeam, q_perp, kz: float):
    q_perp = np.asarray(q_perp, dtype=float)
    pz = atom.p[2]
    q = q_perp + kz * kz + 2.0 * pz * kz
    if not atom.relativistic:
        return q / (2.0 * atom.mass_i)
    b = atom.energy + atom.e_exc
    c = 2.0 * atom.e_exc * atom.kinetic - q
    return -c / (b + np.sqrt(b * b - c))


def rate_jacobian(atom: AtomBeam, delta):
    """dQ/d(delta) / 2M: one for non-relativistic runs, E_f / M_i otherwise."""
    if not atom.relativistic:
        return np.ones_like(np.asarray(delta, dtype=float))
    return (atom.energy + atom.e_exc + np.asarray(delta, dtype=float)) / atom.mass_i
