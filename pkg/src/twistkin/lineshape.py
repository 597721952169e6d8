"""Finite-width lines: forward fringe patterns and profile reconstruction.

A line of excitation energies E_exc + e_j with weights w_j produces the
superposition R(x) = sum_j w_j * h * P(x - e_j) of shifted single-line
patterns on the detuning axis.  Patterns taken with different OAM pairs but
identical photon energies and cone angles are stacked into one linear system
and inverted with second-difference Tikhonov regularization.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import nnls

from ._parallel import ordered_map
from .amplitude import PWAmplitudeModel
from .errors import FixedEnergyViolation, IllPosed, PhysicsError
from .kinematics import AtomBeam, BesselMode
from .spectra import FringePattern, default_cutoff, detuning_scan, detuning_support

KINDS = ("delta", "lorentzian", "gaussian", "double_line", "custom")


def _uniform_step(grid: np.ndarray) -> float:
    if grid.ndim != 1 or grid.size < 2:
        raise PhysicsError("profile grid has >= 2 points")
    steps = np.diff(grid)
    h = float(steps.mean())
    if not h > 0 or np.max(np.abs(steps - h)) > 1e-9 * h:
        raise PhysicsError("profile grid uniform and increasing")
    return h


@dataclass(frozen=True)
class LineProfile:
    """Normalized line profile on a uniform grid of excitation-energy offsets (eV)."""

    grid: np.ndarray
    weights: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if self.kind not in KINDS:
            raise PhysicsError(f"profile kind in {KINDS}", f"kind={self.kind!r}")
        if grid.shape != w.shape:
            raise PhysicsError("profile grid and weights have equal length")
        h = _uniform_step(grid)
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise PhysicsError("profile weights >= 0")
        total = float(w.sum() * h)
        if abs(total - 1.0) > 1e-9:
            raise PhysicsError("profile normalized: sum(weights)*h = 1", f"got {total!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", w)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @staticmethod
    def _normalized(grid, w, kind, params):
        grid = np.asarray(grid, dtype=float)
        h = _uniform_step(grid)
        w = np.asarray(w, dtype=float)
        total = w.sum() * h
        if not total > 0:
            raise PhysicsError("profile has positive total weight")
        return LineProfile(grid, w / total, kind, params)

    @classmethod
    def delta(cls, grid, center: float = 0.0) -> "LineProfile":
        """All weight on the grid point nearest ``center``."""
        grid = np.asarray(grid, dtype=float)
        w = np.zeros_like(grid)
        w[int(np.argmin(np.abs(grid - center)))] = 1.0
        return cls._normalized(grid, w, "delta", {"center": center})

    @classmethod
    def lorentzian(cls, grid, gamma: float, center: float = 0.0) -> "LineProfile":
        """Cauchy profile with full width at half maximum ``gamma``, truncated to the grid."""
        if not gamma > 0:
            raise PhysicsError("gamma > 0", f"gamma={gamma!r}")
        grid = np.asarray(grid, dtype=float)
        half = 0.5 * gamma
        w = half / math.pi / ((grid - center) ** 2 + half * half)
        return cls._normalized(grid, w, "lorentzian", {"gamma": gamma, "center": center})

    @classmethod
    def gaussian(cls, grid, sigma_e: float, center: float = 0.0) -> "LineProfile":
        if not sigma_e > 0:
            raise PhysicsError("sigma_e > 0", f"sigma_e={sigma_e!r}")
        grid = np.asarray(grid, dtype=float)
        w = np.exp(-0.5 * ((grid - center) / sigma_e) ** 2)
        return cls._normalized(grid, w, "gaussian", {"sigma_e": sigma_e, "center": center})

    @classmethod
    def double_line(cls, grid, e1: float, e2: float, fraction: float = 0.5) -> "LineProfile":
        """Two delta lines; ``fraction`` of the weight sits at ``e1``."""
        if not 0 <= fraction <= 1:
            raise PhysicsError("0 <= fraction <= 1", f"fraction={fraction!r}")
        grid = np.asarray(grid, dtype=float)
        w = np.zeros_like(grid)
        w[int(np.argmin(np.abs(grid - e1)))] += fraction
        w[int(np.argmin(np.abs(grid - e2)))] += 1.0 - fraction
        return cls._normalized(grid, w, "double_line", {"e1": e1, "e2": e2, "fraction": fraction})

    @classmethod
    def custom(cls, grid, weights) -> "LineProfile":
        return cls._normalized(grid, weights, "custom", {})


@dataclass(frozen=True)
class LineSetup:
    """Everything a single-line pattern needs apart from the OAM pair.

    ``b1`` and ``b2`` fix the photon energies and cone angles; their ``m``
    values are replaced by each setting.  ``axis`` is the detuning grid on
    which patterns are sampled.
    """

    b1: BesselMode
    b2: BesselMode
    atom: AtomBeam
    model: PWAmplitudeModel
    axis: np.ndarray
    cutoff: Optional[float] = None

    def modes(self, setting: Tuple[int, int]) -> Tuple[BesselMode, BesselMode]:
        m1, m2 = setting
        return dataclasses.replace(self.b1, m=int(m1)), dataclasses.replace(self.b2, m=int(m2))

    @property
    def photon_key(self) -> Tuple[float, float, float, float, float, float]:
        return (self.b1.omega, self.b2.omega, self.b1.kappa, self.b2.kappa, self.b1.kz, self.b2.kz)


def single_line_pattern(setup: LineSetup, setting, shift: float = 0.0) -> np.ndarray:
    """P(x - shift) on ``setup.axis``: single line with E_exc raised by ``shift``."""
    b1, b2 = setup.modes(setting)
    atom = dataclasses.replace(setup.atom, e_exc=setup.atom.e_exc + shift)
    x = np.asarray(setup.axis, dtype=float) - shift
    return detuning_scan(b1, b2, atom, setup.model, x, setup.cutoff).values


def _clip_profile(profile: LineProfile, setup: LineSetup) -> np.ndarray:
    """Weights whose shifted window misses the axis are dropped with a warning."""
    b1, b2 = setup.modes((0, 0))
    lo, hi = detuning_support(b1, b2, setup.atom, setup.cutoff)
    x0, x1 = float(np.min(setup.axis)), float(np.max(setup.axis))
    outside = (profile.grid + hi < x0) | (profile.grid + lo > x1)
    w = profile.weights
    if np.any(outside & (w > 0)):
        warnings.warn("profile support extends past the detuning axis; clipped", RuntimeWarning, stacklevel=3)
        w = np.where(outside, 0.0, w)
    return w


def forward_pattern(profile: LineProfile, setting, setup: LineSetup, threads: int = 1) -> FringePattern:
    """Pattern of a finite-width line: sum_j w_j * h * P(x - e_j)."""
    w = _clip_profile(profile, setup)
    h = profile.step
    idx = np.flatnonzero(w > 0)
    cols = ordered_map(lambda j: single_line_pattern(setup, setting, profile.grid[j]), idx, threads)
    axis = np.asarray(setup.axis, dtype=float)
    total = np.zeros_like(axis)
    for j, col in zip(idx, cols):
        total += (w[j] * h) * col
    b1, b2 = setup.modes(setting)
    eps = default_cutoff(b1, b2) if setup.cutoff is None else setup.cutoff
    meta = {"m1": b1.m, "m2": b2.m, "profile": profile.kind}
    return FringePattern("detuning_eV", axis, total, eps, meta=meta)


def build_design_matrix(settings: Sequence[Tuple[int, int]], grid, setup: LineSetup, threads: int = 1) -> np.ndarray:
    """A[row, j] = P_setting(x_row - e_j) * h, rows stacked setting by setting."""
    grid = np.asarray(grid, dtype=float)
    h = _uniform_step(grid)
    if len(settings) < 1:
        raise PhysicsError(">= 1 OAM setting")
    blocks = []
    for s in settings:
        cols = ordered_map(lambda e: single_line_pattern(setup, s, e), grid, threads)
        blocks.append(np.column_stack(cols) * h)
    return np.vstack(blocks)


@dataclass
class MeasurementSet:
    """Patterns at several OAM settings, all at the same photon energies.

    ``photons`` holds (omega1, omega2, kappa1, kappa2, k1z, k2z) per setting.
    """

    settings: List[Tuple[int, int]]
    patterns: List[FringePattern]
    sigma: List[np.ndarray]
    photons: List[Tuple[float, ...]]

    def __post_init__(self):
        n = len(self.settings)
        if n < 1 or not (len(self.patterns) == len(self.sigma) == len(self.photons) == n):
            raise PhysicsError("one pattern, noise vector and photon tuple per setting")
        ref = tuple(self.photons[0])
        for key in self.photons[1:]:
            if not np.allclose(key, ref, rtol=1e-12, atol=0.0):
                raise FixedEnergyViolation(
                    f"settings use different photon parameters {tuple(key)!r} vs {ref!r}; "
                    "inversion needs fixed photon energies"
                )
        for p, s in zip(self.patterns, self.sigma):
            if p.axis != "detuning_eV":
                raise PhysicsError("patterns on the detuning axis (convert theta_K first)", f"axis={p.axis!r}")
            if np.shape(s) != p.values.shape or np.any(np.asarray(s) <= 0):
                raise PhysicsError("sigma positive, one per pattern sample")

    @classmethod
    def from_setup(cls, setup: LineSetup, settings, patterns, sigma) -> "MeasurementSet":
        key = setup.photon_key
        return cls(list(settings), list(patterns), [np.asarray(s, dtype=float) for s in sigma], [key] * len(settings))


@dataclass(frozen=True)
class ReconstructionConfig:
    """``lam`` None selects the L-curve corner; ``lambdas`` overrides its scan."""

    grid: np.ndarray
    lam: Optional[float] = None
    nonnegativity: bool = True
    lambdas: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        _uniform_step(self.grid)
        if self.lam is not None and not self.lam >= 0:
            raise PhysicsError("lambda >= 0", f"lambda={self.lam!r}")


@dataclass
class Diagnostics:
    lam: float
    residual_norm: float
    smoothness_norm: float
    effective_rank: int
    condition_number: float
    lcurve: np.ndarray  # columns: lambda, residual norm, smoothness norm


def second_difference(n: int) -> np.ndarray:
    L = np.zeros((max(n - 2, 0), n))
    for i in range(n - 2):
        L[i, i:i + 3] = (1.0, -2.0, 1.0)
    return L


def _solve(A, b, L, lam, nonneg):
    if lam > 0:
        A_aug = np.vstack([A, lam * L])
        b_aug = np.concatenate([b, np.zeros(L.shape[0])])
    else:
        A_aug, b_aug = A, b
    if nonneg:
        w, _ = nnls(A_aug, b_aug, maxiter=50 * A.shape[1])
    else:
        w = np.linalg.lstsq(A_aug, b_aug, rcond=None)[0]
    return w, float(np.linalg.norm(A @ w - b)), float(np.linalg.norm(L @ w))


def lcurve_corner(residual, smooth) -> int:
    """Index of maximum curvature of the (log residual, log smoothness) curve."""
    x = np.log(np.maximum(residual, 1e-300))
    y = np.log(np.maximum(smooth, 1e-300))
    best, best_k = 0, -np.inf
    for i in range(1, len(x) - 1):
        p, q, r = np.array([x[i - 1], y[i - 1]]), np.array([x[i], y[i]]), np.array([x[i + 1], y[i + 1]])
        a, b, c = np.linalg.norm(q - p), np.linalg.norm(r - q), np.linalg.norm(r - p)
        if a * b * c == 0:
            continue
        cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        # Menger curvature; the corner bends towards the origin
        k = 2.0 * cross / (a * b * c)
        if k > best_k:
            best_k, best = k, i
    return best


def invert_lineshape(
    measurements: MeasurementSet,
    config: ReconstructionConfig,
    setup: LineSetup,
    threads: int = 1,
) -> Tuple[LineProfile, Diagnostics]:
    """Tikhonov solution of min ||A w - R||^2 + lam^2 ||L w||^2 with noise-weighted rows.

    Raises
    ------
    IllPosed
        If ``lam`` is 0 and the weighted design matrix has effective rank
        below the number of profile grid points.
    """
    if tuple(measurements.photons[0]) != setup.photon_key and not np.allclose(
        measurements.photons[0], setup.photon_key, rtol=1e-12, atol=0.0
    ):
        raise FixedEnergyViolation("measurements and setup use different photon parameters")
    for p in measurements.patterns:
        if p.grid.shape != np.shape(setup.axis) or not np.allclose(p.grid, setup.axis, rtol=1e-12, atol=0.0):
            raise PhysicsError("measured patterns sampled on the setup detuning axis")
    grid = config.grid
    h = _uniform_step(grid)
    A = build_design_matrix(measurements.settings, grid, setup, threads)
    r = np.concatenate([p.values for p in measurements.patterns])
    s = np.concatenate([np.asarray(x, dtype=float) for x in measurements.sigma])
    Aw = A / s[:, None]
    rw = r / s
    sv = np.linalg.svd(Aw, compute_uv=False)
    tol = sv[0] * max(Aw.shape) * np.finfo(float).eps
    rank = int(np.sum(sv > tol))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    L = second_difference(grid.size)
    lambdas = config.lambdas
    if lambdas is None:
        lambdas = sv[0] * np.logspace(-8, 0, 81)
    table = []
    for lam in lambdas:
        _, res, sm = _solve(Aw, rw, L, float(lam), config.nonnegativity)
        table.append((float(lam), res, sm))
    table = np.array(table)
    if config.lam is None:
        lam = float(table[lcurve_corner(table[:, 1], table[:, 2]), 0])
    else:
        lam = float(config.lam)
    if lam == 0.0 and rank < grid.size:
        raise IllPosed(f"effective rank {rank} < {grid.size} profile points at lambda=0")
    w, res, sm = _solve(Aw, rw, L, lam, config.nonnegativity)
    w = np.maximum(w, 0.0) if config.nonnegativity else w
    total = w.sum() * h
    if not total > 0:
        raise IllPosed("reconstructed profile has no positive weight")
    weights = w / total
    if not config.nonnegativity and np.any(weights < 0):
        # the profile type requires non-negative densities
        weights = np.maximum(weights, 0.0)
        weights /= weights.sum() * h
    profile = LineProfile(grid, weights, "custom", {"lambda": lam})
    return profile, Diagnostics(lam, res, sm, rank, cond, table)


def angular_to_detuning(pattern: FringePattern, atom: AtomBeam, kz: float) -> FringePattern:
    """Re-express a theta_K pattern of an atom at rest on the detuning axis.

    Values are divided by K_perp * dK_perp/dtheta, which puts them on the
    same normalization as :func:`detuning_scan`.
    """
    if pattern.axis != "theta_K_rad":
        raise PhysicsError("pattern on the theta_K axis", f"axis={pattern.axis!r}")
    if atom.p_abs != 0.0 or atom.relativistic:
        raise PhysicsError("theta_K conversion needs a non-relativistic atom at rest")
    if kz == 0.0:
        raise PhysicsError("kz != 0: theta_K is fixed at pi/2 when kz = 0")
    theta = pattern.grid
    kp = kz * np.tan(theta)
    delta = (kp * kp + kz * kz) / (2.0 * atom.mass_i)
    dd = np.abs(kp * (kp * kp + kz * kz) / kz)
    order = np.argsort(delta)
    vals = np.where(dd > 0, pattern.values / np.where(dd > 0, dd, 1.0), 0.0)
    env = None
    if pattern.envelope is not None:
        env = (np.where(dd > 0, pattern.envelope / np.where(dd > 0, dd, 1.0), 0.0))[order]
    return FringePattern("detuning_eV", delta[order], vals[order], pattern.boundary_cutoff,
                         envelope=env, meta=dict(pattern.meta))
