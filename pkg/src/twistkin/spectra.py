"""Observable distributions: detuning scans, kick angles, events, fringe census.

Rate convention
---------------
For a detuning ``delta`` the excitation rate is

    rate(delta) = J(delta) * integral |J|^2 dpsi

taken along the energy-conservation circle |K_perp + p_perp|^2 = p_perp^2 + Q(delta)
in the transverse plane, ``psi`` being the polar angle around the circle
centre -p_perp.  This is |J|^2 integrated against delta(Mdelta - ...) d^2K, so
for an atom at rest it reduces to 2*pi*|J(K_perp)|^2.  ``J(delta)`` is 1 for
non-relativistic runs and E_f/M_i otherwise.

|J|^2 ~ 1/area^2 is not integrable at the annulus edges; every integral and
sampler here is restricted to the trimmed annulus
[|k1-k2| + cutoff, k1 + k2 - cutoff].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from ._parallel import ordered_map
from .amplitude import PWAmplitudeModel, amplitude_sq
from .errors import (
    NoSolution,
    NonConvergent,
    OutsideAnnulus,
    PhysicsError,
    SamplingInefficiency,
    Undersampled,
)
from .kinematics import (
    AtomBeam,
    BesselMode,
    TransferVector,
    detuning_from_components,
    detuning_from_q,
    detuning_window_crossed,
    rate_jacobian,
    transverse_q,
)

AXES = ("detuning_eV", "theta_K_rad", "k_perp_eV", "phi_K_rad")
TWO_PI = 2.0 * math.pi


@dataclass
class FringePattern:
    """Sampled rate density on one axis.

    ``envelope`` is the fringe-free part of ``values`` (same density with the
    interference bracket replaced by its maximum); ``values / envelope`` is
    the fringe function in [0, 1].
    """

    axis: str
    grid: np.ndarray
    values: np.ndarray
    boundary_cutoff: float
    envelope: Optional[np.ndarray] = None
    support: Optional[Tuple[float, float]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise PhysicsError(f"axis in {AXES}", f"axis={self.axis!r}")
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise PhysicsError("grid and values are equal-length 1-d arrays")
        if self.grid.size > 1 and not np.all(np.diff(self.grid) > 0):
            raise PhysicsError("grid strictly increasing")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise PhysicsError("values finite and >= 0")
        if self.envelope is not None:
            self.envelope = np.asarray(self.envelope, dtype=float)

    def fringe_function(self) -> np.ndarray:
        """values / envelope where the envelope is positive, else values."""
        if self.envelope is None:
            return self.values.copy()
        out = np.zeros_like(self.values)
        pos = self.envelope > 0
        out[pos] = self.values[pos] / self.envelope[pos]
        return out


@dataclass(frozen=True)
class KickEvent:
    K: TransferVector
    delta: float
    weight: float = 1.0


@dataclass
class KickEvents:
    """Columnar event list; indexing and iteration yield :class:`KickEvent`."""

    k_perp: np.ndarray
    phi_k: np.ndarray
    kz: float
    delta: np.ndarray
    weight: np.ndarray
    acceptance: float
    excluded_fraction: float

    def __len__(self) -> int:
        return self.k_perp.size

    def __getitem__(self, i) -> KickEvent:
        return KickEvent(
            TransferVector(float(self.k_perp[i]), float(self.phi_k[i]), self.kz),
            float(self.delta[i]),
            float(self.weight[i]),
        )

    def __iter__(self) -> Iterator[KickEvent]:
        for i in range(len(self)):
            yield self[i]


def default_cutoff(b1: BesselMode, b2: BesselMode) -> float:
    return 1e-4 * (b1.kappa + b2.kappa)


def trimmed_annulus(b1: BesselMode, b2: BesselMode, cutoff: float | None = None) -> Tuple[float, float]:
    eps = default_cutoff(b1, b2) if cutoff is None else cutoff
    r_in = abs(b1.kappa - b2.kappa) + eps
    r_out = b1.kappa + b2.kappa - eps
    if not r_in < r_out:
        raise PhysicsError("boundary cutoff smaller than half the annulus width", f"cutoff={eps!r}")
    return r_in, r_out


def excluded_fraction(b1: BesselMode, b2: BesselMode, cutoff: float | None = None) -> float:
    """Fraction of the annulus area removed by the boundary cutoff."""
    lo, hi = abs(b1.kappa - b2.kappa), b1.kappa + b2.kappa
    r_in, r_out = trimmed_annulus(b1, b2, cutoff)
    return ((r_in**2 - lo**2) + (hi**2 - r_out**2)) / (hi**2 - lo**2)


def _phi_integrated(b1, b2, model: PWAmplitudeModel, k_perp):
    """(integral |J|^2 dphi_K, integral envelope dphi_K) at each K_perp."""
    k_perp = np.asarray(k_perp, dtype=float)
    if model.phi_independent:
        amp, env = amplitude_sq(b1, b2, k_perp, 0.0, model)
        return TWO_PI * amp, TWO_PI * env
    # the tabulated model is a trigonometric polynomial: a uniform rule with
    # more points than its squared degree integrates it exactly
    n_phi = max(64, 4 * model.table_size)
    phi = TWO_PI * np.arange(n_phi) / n_phi
    kk, pp = np.meshgrid(k_perp.ravel(), phi, indexing="ij")
    amp, env = amplitude_sq(b1, b2, kk, pp, model)
    scale = TWO_PI / n_phi
    return (amp.sum(axis=1) * scale).reshape(k_perp.shape), (env.sum(axis=1) * scale).reshape(k_perp.shape)


# ---------------------------------------------------------------------------
# tanh-sinh rule over many intervals at once

_T_MAX = 3.0


def _tanh_sinh(func, a, b, rtol=1e-6, max_level=11, h0=0.5, min_level=3):
    """Integrate func over [a_i, b_i] for every row i.

    ``func(x)`` takes an (n, k) array of abscissae and returns a tuple of
    (n, k) arrays; each is integrated.  Halving stops per row once the first
    integrand changes by less than ``rtol``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    half = 0.5 * (b - a)

    def nodes(t):
        u = 0.5 * math.pi * np.sinh(t)
        w = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
        # distance from the nearer endpoint, kept accurate near both ends
        dist = 2.0 * expit(-2.0 * np.abs(u))
        return u, w, dist

    def evaluate(rows, t):
        u, w, dist = nodes(t)
        hw = half[rows, None]
        x = np.where(u < 0, a[rows, None] + hw * dist, b[rows, None] - hw * dist)
        vals = func(rows, x)
        return tuple((v * (w * hw)).sum(axis=1) for v in vals)

    k = np.arange(-int(_T_MAX / h0), int(_T_MAX / h0) + 1)
    rows = np.arange(n)
    sums = [s * h0 for s in evaluate(rows, k * h0)]
    h = h0
    active = np.ones(n, dtype=bool)
    for _level in range(max_level):
        h *= 0.5
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        kk = np.arange(-int(_T_MAX / h), int(_T_MAX / h) + 1)
        t = kk[kk % 2 != 0] * h  # only the nodes new at this level
        new = evaluate(idx, t)
        prev0 = sums[0][idx].copy()
        for s, add in zip(sums, new):
            s[idx] = 0.5 * s[idx] + h * add
        change = np.abs(sums[0][idx] - prev0)
        scale = np.abs(sums[0][idx])
        done = change <= rtol * scale + 1e-300
        if _level + 1 >= min_level:
            active[idx[done]] = False
    else:
        if active.any():
            raise NonConvergent(f"tanh-sinh rule did not reach rtol={rtol!r} on {int(active.sum())} intervals")
    return sums


def circle_rates(b1, b2, atom: AtomBeam, model: PWAmplitudeModel, q_perp, cutoff=None, rtol=1e-6):
    """integral |J|^2 dpsi (and envelope) around each energy-conservation circle.

    Rows with an empty intersection between circle and trimmed annulus give 0.
    """
    q_perp = np.atleast_1d(np.asarray(q_perp, dtype=float))
    r_in, r_out = trimmed_annulus(b1, b2, cutoff)
    rate = np.zeros_like(q_perp)
    env = np.zeros_like(q_perp)
    p = atom.p_perp

    if p == 0.0:
        ok = (q_perp >= r_in * r_in) & (q_perp <= r_out * r_out)
        if ok.any():
            rate[ok], env[ok] = _phi_integrated(b1, b2, model, np.sqrt(q_perp[ok]))
        return rate, env

    r2 = p * p + q_perp
    ok = r2 > 0
    R = np.sqrt(np.where(ok, r2, 0.0))
    r_minus = np.where(ok, q_perp / (R + p), 0.0)  # R - p without cancellation
    u_min = r_minus * r_minus
    u_max = (R + p) ** 2
    u_lo = np.maximum(r_in * r_in, u_min)
    u_hi = np.minimum(r_out * r_out, u_max)
    ok &= u_lo < u_hi
    if not ok.any():
        return rate, env
    idx = np.flatnonzero(ok)
    Rk, rmk = R[idx], r_minus[idx]
    four_pr = 4.0 * p * Rk

    def psi_of(u):
        s = np.clip((u - rmk * rmk) / four_pr, 0.0, 1.0)
        return 2.0 * np.arcsin(np.sqrt(s))

    psi_a = psi_of(u_lo[idx])
    psi_b = psi_of(u_hi[idx])
    phi_p = atom.phi_p

    def integrand(sign):
        def f(rows, psi):
            Rr = Rk[rows, None]
            sh = np.sin(0.5 * psi)
            x = rmk[rows, None] - 2.0 * Rr * sh * sh
            y = sign * Rr * np.sin(psi)
            kp = np.clip(np.hypot(x, y), r_in, r_out)
            phi = np.arctan2(y, x) + phi_p
            return amplitude_sq(b1, b2, kp, phi, model)

        return f

    up = _tanh_sinh(integrand(1.0), psi_a, psi_b, rtol=rtol)
    if model.phi_independent:
        rate[idx], env[idx] = 2.0 * up[0], 2.0 * up[1]
    else:
        down = _tanh_sinh(integrand(-1.0), psi_a, psi_b, rtol=rtol)
        rate[idx], env[idx] = up[0] + down[0], up[1] + down[1]
    return rate, env


def detuning_support(b1, b2, atom: AtomBeam, cutoff=None) -> Tuple[float, float]:
    """Detuning interval on which the rate is non-zero (trimmed annulus)."""
    r_in, r_out = trimmed_annulus(b1, b2, cutoff)
    p = atom.p_perp
    r_star = min(max(p, r_in), r_out)
    q_lo = r_star * r_star - 2.0 * p * r_star
    q_hi = r_out * r_out + 2.0 * p * r_out
    kz = b1.kz + b2.kz
    lo, hi = detuning_from_q(atom, np.array([q_lo, q_hi]), kz)
    return float(lo), float(hi)


def _pattern_meta(b1, b2, atom, model, cutoff):
    return {
        "m1": b1.m,
        "m2": b2.m,
        "omega1": b1.omega,
        "omega2": b2.omega,
        "kappa1": b1.kappa,
        "kappa2": b2.kappa,
        "kz": b1.kz + b2.kz,
        "excluded_fraction": excluded_fraction(b1, b2, cutoff),
        "model": model.kind,
    }


def detuning_scan(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    grid,
    cutoff: float | None = None,
    rtol: float = 1e-6,
) -> FringePattern:
    """Excitation rate versus detuning omega1 + omega2 - E_exc.

    For an atom at rest each detuning maps to a single |K_perp| and the rate
    is 2*pi*|J|^2 there; a moving atom spreads it along a circle.  Grid
    points outside the window give zero.
    """
    grid = np.asarray(grid, dtype=float)
    eps = default_cutoff(b1, b2) if cutoff is None else cutoff
    kz = b1.kz + b2.kz
    q = transverse_q(atom, grid, kz)
    rate, env = circle_rates(b1, b2, atom, model, q, eps, rtol)
    jac = rate_jacobian(atom, grid)
    return FringePattern(
        "detuning_eV",
        grid,
        rate * jac,
        eps,
        envelope=env * jac,
        support=detuning_support(b1, b2, atom, eps),
        meta=_pattern_meta(b1, b2, atom, model, eps),
    )


def crossed_beam_scan(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    grid,
    cutoff: float | None = None,
    rtol: float = 1e-6,
) -> FringePattern:
    """Detuning scan for an atom moving across balanced counter-propagating photons."""
    if not atom.p_perp > 0:
        raise PhysicsError("crossed beam needs a transverse atom momentum", f"p={atom.p!r}")
    kz = b1.kz + b2.kz
    if abs(kz) > 1e-9 * (abs(b1.kz) + abs(b2.kz)):
        raise PhysicsError("k1z + k2z = 0 in the crossed-beam geometry", f"k1z+k2z={kz!r}")
    pattern = detuning_scan(b1, b2, atom, model, grid, cutoff, rtol)
    pattern.meta["beta"] = atom.beta
    pattern.meta["window_estimate"] = detuning_window_crossed(b1.kappa, b2.kappa, min(atom.beta, 1.0))
    return pattern


def radial_integral(b1, b2, model, r_lo, r_hi, n_panels=None, order=16):
    """(integral |J|^2 d^2K, envelope integral) over r_lo <= |K_perp| <= r_hi.

    Uses t = log((u-a)/(b-u)), u = K^2, which turns the 1/area^2 envelope
    into a constant.
    """
    a = (b1.kappa - b2.kappa) ** 2
    b = (b1.kappa + b2.kappa) ** 2
    t_lo, t_hi = _t_of_k(a, b, r_lo), _t_of_k(a, b, r_hi)
    if n_panels is None:
        n_panels = max(64, 16 * (abs(b1.m) + abs(b2.m)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(t_lo, t_hi, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    hw = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    wt = (hw[:, None] * w[None, :]).ravel()
    um_a = (b - a) * expit(t)
    bm_u = (b - a) * expit(-t)
    kp = np.sqrt(a + um_a)
    amp, env = _phi_integrated(b1, b2, model, kp)
    jac = 0.5 * um_a * bm_u / (b - a)  # d^2K = (1/2) du dphi, du = (u-a)(b-u)/(b-a) dt
    return float(np.sum(wt * jac * amp)), float(np.sum(wt * jac * env))


def _t_of_k(a, b, k):
    u = k * k
    return math.log((u - a) / (b - u))


def kperp_bin_probabilities(b1, b2, model, edges, cutoff=None) -> np.ndarray:
    """Probability of each |K_perp| bin under |J|^2 d^2K, normalized on the trimmed annulus."""
    r_in, r_out = trimmed_annulus(b1, b2, cutoff)
    edges = np.clip(np.asarray(edges, dtype=float), r_in, r_out)
    parts = np.array([radial_integral(b1, b2, model, lo, hi)[0] if hi > lo else 0.0
                      for lo, hi in zip(edges[:-1], edges[1:])])
    total = radial_integral(b1, b2, model, r_in, r_out, n_panels=max(256, 32 * (abs(b1.m) + abs(b2.m))))[0]
    return parts / total


def angular_distribution(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    delta: float | None = None,
    n_theta: int = 512,
    cutoff: float | None = None,
) -> FringePattern:
    """Distribution of the kick polar angle theta_K of excited atoms.

    Kicks are collected over the detuning window up to ``delta`` (the whole
    window when None); cos(theta_K) = K_z / |K| with K_z fixed by the
    photons, so |K_perp| and theta_K are in one-to-one correspondence.
    """
    kz = b1.kz + b2.kz
    if atom.p_abs > 1e-3 * max(min(b1.kappa, b2.kappa), 1e-300):
        raise PhysicsError("angular distribution needs an atom at rest", f"|p|={atom.p_abs!r}")
    eps = default_cutoff(b1, b2) if cutoff is None else cutoff
    if b1.kappa == 0.0 or b2.kappa == 0.0:
        # one plane-wave-like photon: a single allowed K_perp
        kp = max(b1.kappa, b2.kappa)
        if delta is not None and transverse_q(atom, delta, kz) < kp * kp * (1 - 1e-12):
            raise NoSolution("the detuning sphere misses the single allowed K_perp")
        return FringePattern("theta_K_rad", [math.atan2(kp, kz)], [1.0], eps,
                             meta={"single_k_perp": kp, "m1": b1.m, "m2": b2.m})
    r_in, r_out = trimmed_annulus(b1, b2, eps)
    r_hi = r_out
    if delta is not None:
        q = float(transverse_q(atom, delta, kz))
        if q < r_in * r_in:
            raise NoSolution(f"detuning {delta!r} does not reach the annulus")
        r_hi = min(r_out, math.sqrt(q))
    meta = _pattern_meta(b1, b2, atom, model, eps)
    if kz == 0.0:
        total, total_env = radial_integral(b1, b2, model, r_in, r_hi)
        return FringePattern("theta_K_rad", [0.5 * math.pi], [total], eps,
                             envelope=[total_env], meta=meta)
    th_a, th_b = math.atan2(r_in, kz), math.atan2(r_hi, kz)
    theta = np.linspace(min(th_a, th_b), max(th_a, th_b), n_theta)
    kp = np.clip(kz * np.tan(theta), r_in, r_hi)
    amp, env = _phi_integrated(b1, b2, model, kp)
    dk_dtheta = (kp * kp + kz * kz) / abs(kz)
    jac = kp * dk_dtheta
    return FringePattern("theta_K_rad", theta, amp * jac, eps, envelope=env * jac,
                         support=(float(theta[0]), float(theta[-1])), meta=meta)


def azimuthal_distribution(
    b1: BesselMode,
    b2: BesselMode,
    model: PWAmplitudeModel,
    k_perp: float,
    n_phi: int = 360,
    cutoff: float | None = None,
) -> FringePattern:
    """|J|^2 versus phi_K on the ring |K_perp| = k_perp."""
    eps = default_cutoff(b1, b2) if cutoff is None else cutoff
    r_in, r_out = trimmed_annulus(b1, b2, eps)
    if not r_in <= k_perp <= r_out:
        raise OutsideAnnulus(f"k_perp={k_perp!r} outside the trimmed annulus [{r_in!r}, {r_out!r}]")
    phi = TWO_PI * np.arange(n_phi) / n_phi
    amp, env = amplitude_sq(b1, b2, np.full(n_phi, float(k_perp)), phi, model)
    meta = {"m1": b1.m, "m2": b2.m, "k_perp": k_perp, "model": model.kind}
    return FringePattern("phi_K_rad", phi, amp, eps, envelope=env, meta=meta)


def sample_kicks(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    n: int,
    seed: int = 0,
    cutoff: float | None = None,
    threads: int = 1,
    chunk_size: int = 1 << 16,
) -> KickEvents:
    """Draw momentum transfers distributed as |J|^2 d^2K_perp on the trimmed annulus.

    Proposals follow the fringe-free 1/area^2 shape exactly (uniform in
    t = log((u-a)/(b-u)), u = K^2) and are accepted with probability
    |M_a e^{i Phi} + M_b e^{-i Phi}|^2 / max(|M_a| + |M_b|)^2.  Chunk ``i`` draws
    from the substream SeedSequence(seed, spawn_key=(i,)), so the output
    does not depend on ``threads``.
    """
    eps = default_cutoff(b1, b2) if cutoff is None else cutoff
    r_in, r_out = trimmed_annulus(b1, b2, eps)
    a = (b1.kappa - b2.kappa) ** 2
    b = (b1.kappa + b2.kappa) ** 2
    t_lo, t_hi = _t_of_k(a, b, r_in), _t_of_k(a, b, r_out)
    bound2 = model.bound() ** 2
    pref_num = 4.0 * (b1.kappa * b2.kappa) ** 2

    def chunk(i):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        t = rng.uniform(t_lo, t_hi, chunk_size)
        phi = rng.uniform(0.0, TWO_PI, chunk_size)
        acc = rng.uniform(0.0, 1.0, chunk_size)
        um_a = (b - a) * expit(t)
        bm_u = (b - a) * expit(-t)
        kp = np.clip(np.sqrt(a + um_a), r_in, r_out)
        amp, _ = amplitude_sq(b1, b2, kp, phi, model)
        bracket2 = amp * (um_a * bm_u) / pref_num
        keep = acc * bound2 < bracket2
        return kp[keep], phi[keep]

    kps, phis = [], []
    have = 0
    next_chunk = 0
    batch = max(1, int(threads or 1))
    while have < n:
        results = ordered_map(chunk, range(next_chunk, next_chunk + batch), threads)
        next_chunk += batch
        for kp, ph in results:
            if have >= n:
                break  # extra chunks from a parallel batch are discarded
            kps.append(kp)
            phis.append(ph)
            have += kp.size
        if have == 0 and next_chunk >= 1000:
            raise NonConvergent("rejection sampler accepted no events")
    proposed = len(kps) * chunk_size
    acceptance = have / proposed if proposed else 0.0
    if acceptance < 1e-4:
        warnings.warn(f"rejection sampler acceptance {acceptance:.2e} < 1e-4", SamplingInefficiency, stacklevel=2)
    kp = np.concatenate(kps)[:n] if kps else np.empty(0)
    ph = np.concatenate(phis)[:n] if phis else np.empty(0)
    kz = b1.kz + b2.kz
    delta = detuning_from_components(atom, kp * np.cos(ph), kp * np.sin(ph), kz)
    return KickEvents(kp, ph, kz, np.atleast_1d(delta), np.ones(kp.size), acceptance,
                      excluded_fraction(b1, b2, eps))


# ---------------------------------------------------------------------------
# fringe census


@dataclass(frozen=True)
class Fringe:
    """One interior minimum of the fringe function."""

    position: float
    height: float
    contrast: float
    dark: bool = True


@dataclass(frozen=True)
class FringeCensus:
    """Dark fringes, shallow dips and the bright lobes between them.

    ``fringes`` holds the minima that reach the fringe floor, i.e. zero
    crossings of the interference term; ``dips`` holds the remaining minima,
    where the fringe phase turns back without crossing.
    """

    fringes: List[Fringe]
    lobes: List[Tuple[float, float]]
    dips: List[Fringe] = field(default_factory=list)

    def __len__(self):
        return len(self.fringes)

    @property
    def count(self) -> int:
        return len(self.fringes)

    @property
    def minima(self) -> List[Fringe]:
        """Dark fringes and dips in position order."""
        return sorted(self.fringes + self.dips, key=lambda f: f.position)


def _support_slice(pattern: FringePattern) -> slice:
    ok = pattern.values > 0
    if pattern.support is not None:
        lo, hi = pattern.support
        ok &= (pattern.grid >= lo) & (pattern.grid <= hi)
    nz = np.flatnonzero(ok)
    if nz.size == 0:
        return slice(0, 0)
    return slice(int(nz[0]), int(nz[-1]) + 1)


def _parabola_vertex(fm, f0, fp):
    den = fm - 2.0 * f0 + fp
    if den <= 0:
        return 0.0, f0
    s = 0.5 * (fm - fp) / den
    s = min(max(s, -1.0), 1.0)
    return s, f0 - 0.25 * (fm - fp) * s


def fringe_census(pattern: FringePattern, min_contrast: float = 1e-9, points_per_oscillation: int = 8,
                  dark_tol: float = 1e-2) -> FringeCensus:
    """Locate dark fringes, their neighbouring bright lobes and Michelson contrast.

    Extrema are found on the fringe function values/envelope on the samples
    that are positive and lie inside ``pattern.support`` (when set).  Each interior minimum is refined by a parabola
    through its three samples; its contrast is taken against the lower of
    the two neighbouring lobe maxima.  Minima with contrast below
    ``min_contrast`` are rounding noise and are dropped.  A minimum is dark
    when its refined depth lies within ``dark_tol`` of the fringe-function
    range above the deepest minimum; for an unsmeared constant model that
    floor is zero and dark fringes are exactly the sign changes of
    cos(m1 delta1 + m2 delta2).  Shallower minima are reported as dips.

    Raises
    ------
    Undersampled
        If the support holds fewer than ``points_per_oscillation`` samples per
        expected oscillation; at most |m1| + |m2| oscillations fit in a window.
    """
    sl = _support_slice(pattern)
    x = pattern.grid[sl]
    f = pattern.fringe_function()[sl]
    raw = pattern.values[sl]
    m1 = pattern.meta.get("m1")
    m2 = pattern.meta.get("m2")
    if m1 is not None and m2 is not None:
        n_osc = abs(m1) + abs(m2)
        if n_osc and x.size < points_per_oscillation * (n_osc + 1):
            raise Undersampled(
                f"{x.size} samples in support, need >= {points_per_oscillation * (n_osc + 1)} for m=({m1}, {m2})"
            )
    n = f.size
    if n < 3:
        return FringeCensus([], [])
    minima = [i for i in range(1, n - 1) if f[i] < f[i - 1] and f[i] <= f[i + 1]]

    found = []
    for j, i in enumerate(minima):
        lo = minima[j - 1] if j > 0 else 0
        hi = minima[j + 1] if j + 1 < len(minima) else n - 1
        left = int(lo + np.argmax(f[lo:i + 1]))
        right = int(i + np.argmax(f[i:hi + 1]))
        peak = min(f[left], f[right])
        s, fmin = _parabola_vertex(f[i - 1], f[i], f[i + 1])
        fmin = max(fmin, 0.0)
        contrast = (peak - fmin) / (peak + fmin) if peak + fmin > 0 else 0.0
        if contrast < min_contrast:
            continue
        step = x[i + 1] - x[i] if s >= 0 else x[i] - x[i - 1]
        height = raw[left] if f[left] <= f[right] else raw[right]
        found.append((i, fmin, float(x[i] + s * step), float(height), float(contrast)))
    fringes, dips = [], []
    if found:
        floor = min(item[1] for item in found)
        cut = floor + dark_tol * (float(np.max(f)) - floor)
        for i, fmin, pos, height, contrast in found:
            dark = fmin <= cut
            (fringes if dark else dips).append(Fringe(pos, height, contrast, dark))
    # one bright lobe per stretch between minima, window ends included
    bounds = [0] + [item[0] for item in found] + [n - 1]
    lobes = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        i = int(lo + np.argmax(f[lo:hi + 1]))
        lobes.append((float(x[i]), float(raw[i])))
    return FringeCensus(fringes, lobes, dips)
