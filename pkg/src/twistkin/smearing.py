"""Fringe smearing by a Gaussian spread of the initial atom momentum."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from ._parallel import ordered_map
from .amplitude import PWAmplitudeModel, amplitude_sq
from .errors import AlwaysVisible, NeverVisible, NoFringe, PhysicsError
from .kinematics import AtomBeam, BesselMode
from .spectra import FringePattern, detuning_scan, fringe_census, trimmed_annulus

TWO_PI = 2.0 * math.pi
METHODS = ("auto", "quadrature", "mc")
MAX_QUAD_NODES = 1024


@dataclass(frozen=True)
class MomentumSpread:
    """Independent Gaussian spread of (p_x, p_y, p_z) around the beam momentum.

    ``n_quad`` nodes are used per spread axis on the quadrature path,
    ``n_mc`` samples on the Monte-Carlo path.
    """

    sigma_p: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    n_quad: int = 16
    n_mc: int = 4096
    seed: int = 0
    method: str = "auto"

    def __post_init__(self):
        s = tuple(float(x) for x in self.sigma_p)
        if len(s) != 3:
            raise PhysicsError("sigma_p is a 3-vector")
        if any(not (x >= 0 and math.isfinite(x)) for x in s):
            raise PhysicsError("sigma_p components >= 0", f"sigma_p={s!r}")
        object.__setattr__(self, "sigma_p", s)
        if self.n_quad < 1 or self.n_mc < 1:
            raise PhysicsError("n_quad >= 1 and n_mc >= 1")
        if self.method not in METHODS:
            raise PhysicsError(f"method in {METHODS}", f"method={self.method!r}")

    @classmethod
    def isotropic(cls, sigma: float, **kw) -> "MomentumSpread":
        return cls((sigma, sigma, sigma), **kw)

    @property
    def is_zero(self) -> bool:
        return all(x == 0.0 for x in self.sigma_p)


def _active_axes(spread: MomentumSpread, atom: AtomBeam, kz: float):
    sx, sy, sz = spread.sigma_p
    # p_z only enters through 2*p_z*kz (and the energy of relativistic atoms)
    drop_z = kz == 0.0 and not atom.relativistic
    return [i for i, s in enumerate((sx, sy, sz)) if s > 0 and not (i == 2 and drop_z)]


def _quadrature_nodes(spread: MomentumSpread, atom: AtomBeam, axes, model: PWAmplitudeModel):
    """Momentum offsets and weights (summing to 1) for the Gaussian average."""
    sx, sy, _ = spread.sigma_p
    n = spread.n_quad
    p0 = np.asarray(atom.p, dtype=float)
    # an isotropic transverse spread around p_perp = 0 only matters through
    # |p_perp|, which is Rayleigh distributed: Gauss-Laguerre in |p|^2/(2 sigma^2)
    if (0 in axes and 1 in axes and sx == sy and p0[0] == 0.0 and p0[1] == 0.0
            and model.phi_independent):
        s, ws = np.polynomial.laguerre.laggauss(n)
        radial = [(sx * math.sqrt(2.0 * si), wi) for si, wi in zip(s, ws)]
        other = [i for i in axes if i not in (0, 1)]
        zs = [(0.0, 1.0)]
        if other:
            x, w = np.polynomial.hermite_e.hermegauss(n)
            zs = list(zip(spread.sigma_p[2] * x, w / math.sqrt(2.0 * math.pi)))
        nodes = []
        for r, wr in radial:
            for z, wz in zs:
                nodes.append(((r, 0.0, p0[2] + z), wr * wz))
        return nodes
    x, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / math.sqrt(2.0 * math.pi)
    grids = [list(zip(spread.sigma_p[i] * x, w)) for i in axes]
    nodes = [((p0[0], p0[1], p0[2]), 1.0)]
    for ax, pts in zip(axes, grids):
        new = []
        for p, wp in nodes:
            for dx, wx in pts:
                q = list(p)
                q[ax] += dx
                new.append((tuple(q), wp * wx))
        nodes = new
    return nodes


MAX_KERNEL_WORK = 2_000_000_000  # nodes times grid points


def _kernel_path_applies(atom: AtomBeam) -> bool:
    return not atom.relativistic


def _kernel_smear(b1, b2, atom, model, grid, spread, cutoff, chunk=1 << 15):
    """Momentum average done in closed form, annulus integral by quadrature.

    For a non-relativistic atom the detuning of a fixed transfer K is linear
    in p, so a Gaussian p distribution turns delta(2M delta - Q(K)) into a
    normal density in delta with mean (K^2 + 2 p0.K)/2M and standard
    deviation |sigma_p * K|/M.  What is left is a smooth integral of |J|^2
    over the trimmed annulus in t = log((u-a)/(b-u)), u = K_perp^2, and
    phi_K.  Widths below half the grid spacing cannot be seen at the sample
    points and are raised to it.  Returns None when resolving the integral
    needs more than MAX_KERNEL_WORK node-sample products.
    """
    grid = np.asarray(grid, dtype=float)
    m = atom.mass_i
    kz = b1.kz + b2.kz
    sx, sy, sz = spread.sigma_p
    px, py, pz = atom.p
    p_perp = math.hypot(px, py)
    r_in, r_out = trimmed_annulus(b1, b2, cutoff)
    a = (b1.kappa - b2.kappa) ** 2
    b = (b1.kappa + b2.kappa) ** 2
    t_lo = math.log((r_in * r_in - a) / (b - r_in * r_in))
    t_hi = math.log((r_out * r_out - a) / (b - r_out * r_out))
    if grid.size > 1:
        s_floor = 0.5 * float(np.min(np.diff(grid)))
    else:
        s_floor = 1e-3 * (b - a + 4.0 * p_perp * r_out) / (2.0 * m)
    # steepest d(mean)/dt, sampled, and d(mean)/dphi
    ts = np.linspace(t_lo, t_hi, 2001)
    us = a + (b - a) * expit(ts)
    du = (us - a) * (b - us) / (b - a)
    slope_t = float(np.max(du * (1.0 + p_perp / np.sqrt(us)))) / (2.0 * m)
    slope_phi = p_perp * r_out / m
    s_min = max(math.hypot(min(sx, sy) * r_in, sz * kz) / m, s_floor)
    n_phi = 1
    if not (sx == sy and model.phi_independent and p_perp == 0.0):
        n_phi = max(64 if sx == sy else 128, 4 * model.table_size,
                    int(math.ceil(TWO_PI * slope_phi / s_min)))
    phi = TWO_PI * np.arange(n_phi) / n_phi
    w_phi = TWO_PI / n_phi
    # narrowest kernel along each phi ray sits on the inner edge; a 16-node
    # Gauss-Legendre panel absorbs ~6 of those widths of drift in t
    s_ray = np.hypot(np.hypot(sx * np.cos(phi), sy * np.sin(phi)) * r_in, sz * kz) / m
    s_ray = np.maximum(s_ray, s_floor)
    n_min = max(64, 16 * (abs(b1.m) + abs(b2.m)))
    panels = np.maximum(n_min, np.ceil((t_hi - t_lo) * slope_t / (6.0 * s_ray))).astype(int)
    if panels.max() > 20000 or 16 * int(panels.sum()) * max(grid.size, 1) > MAX_KERNEL_WORK:
        return None
    x, w = np.polynomial.legendre.leggauss(16)
    mus, sds, was, wes = [], [], [], []
    for n_p in np.unique(panels):
        sel = phi[panels == n_p]
        edges = np.linspace(t_lo, t_hi, n_p + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        hw = 0.5 * (edges[1:] - edges[:-1])
        t = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
        wt = (hw[:, None] * w[None, :]).ravel()
        um_a = (b - a) * expit(t)
        bm_u = (b - a) * expit(-t)
        kp = np.clip(np.sqrt(a + um_a), r_in, r_out)
        du_dt = um_a * bm_u / (b - a)
        kk, pp = np.meshgrid(kp, sel, indexing="ij")
        amp, env = amplitude_sq(b1, b2, kk, pp, model)
        weight = (0.5 * du_dt * wt)[:, None] * w_phi / m
        kx, ky = kk * np.cos(pp), kk * np.sin(pp)
        mus.append(((kk * kk + kz * kz + 2.0 * (px * kx + py * ky + pz * kz)) / (2.0 * m)).ravel())
        sd = np.sqrt((sx * kx) ** 2 + (sy * ky) ** 2 + (sz * kz) ** 2) / m
        sds.append(np.maximum(sd, s_floor).ravel())
        was.append((weight * amp).ravel())
        wes.append((weight * env).ravel())
    mu, sd = np.concatenate(mus), np.concatenate(sds)
    wa, we = np.concatenate(was), np.concatenate(wes)
    values = np.zeros_like(grid)
    envelope = np.zeros_like(grid)
    for i0 in range(0, mu.size, chunk):
        sl = slice(i0, i0 + chunk)
        z = (grid[:, None] - mu[None, sl]) / sd[None, sl]
        g = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sd[None, sl])
        values += g @ wa[sl]
        envelope += g @ we[sl]
    return values, envelope, len(mu)


def _mc_nodes(spread: MomentumSpread, atom: AtomBeam, axes):
    rng = np.random.default_rng(np.random.SeedSequence(spread.seed))
    p0 = np.asarray(atom.p, dtype=float)
    draws = np.tile(p0, (spread.n_mc, 1))
    for i in axes:
        draws[:, i] += spread.sigma_p[i] * rng.standard_normal(spread.n_mc)
    w = 1.0 / spread.n_mc
    return [(tuple(row), w) for row in draws]


def smear_pattern(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    grid,
    spread: MomentumSpread,
    cutoff: float | None = None,
    threads: int = 1,
) -> FringePattern:
    """Detuning scan averaged over the Gaussian distribution of the atom momentum.

    Quadrature path: for a non-relativistic atom the momentum average is
    done in closed form (see :func:`_kernel_smear`); relativistic atoms, and
    beams too fast for the kernel's node budget, get Gauss-Hermite nodes per
    spread axis and the shifted scans are averaged.  ``spread.method`` "mc" draws
    the momenta instead; "auto" does so when the tensor grid would exceed
    MAX_QUAD_NODES nodes.
    A zero spread returns :func:`detuning_scan` unchanged.  The envelope is
    averaged with the same nodes, so values/envelope remains the fringe
    function of the smeared pattern.
    """
    base = detuning_scan(b1, b2, atom, model, grid, cutoff)
    kz = b1.kz + b2.kz
    axes = _active_axes(spread, atom, kz)
    if spread.is_zero or not axes:
        base.meta["sigma_p"] = list(spread.sigma_p)
        return base
    method = spread.method
    nodes = None
    meta = dict(base.meta)
    # the census looks at the unsmeared window; outside it values/envelope
    # is a ratio of Gaussian tails
    lo, hi = base.support
    if method in ("auto", "quadrature") and _kernel_path_applies(atom):
        kernel = _kernel_smear(b1, b2, atom, model, grid, spread, cutoff)
        if kernel is not None:
            values, env, n_nodes = kernel
            meta.update({"sigma_p": list(spread.sigma_p), "smearing": "quadrature", "n_nodes": n_nodes})
            return FringePattern(base.axis, base.grid, values, base.boundary_cutoff, envelope=env,
                                 support=(lo, hi), meta=meta)
    if method in ("auto", "quadrature"):
        nodes = _quadrature_nodes(spread, atom, axes, model)
        if method == "auto" and len(nodes) > MAX_QUAD_NODES:
            nodes = None
        method = "quadrature" if nodes is not None else "mc"
    if nodes is None:
        nodes = _mc_nodes(spread, atom, axes)

    def one(node):
        p, _ = node
        shifted = dataclasses.replace(atom, p=p)
        pat = detuning_scan(b1, b2, shifted, model, grid, cutoff)
        return pat.values, pat.envelope

    results = ordered_map(one, nodes, threads)
    values = np.zeros_like(base.values)
    env = np.zeros_like(base.values)
    for (_, w), (v, e) in zip(nodes, results):
        values += w * v
        env += w * e
    meta.update({"sigma_p": list(spread.sigma_p), "smearing": method, "n_nodes": len(nodes)})
    if method == "mc":
        sq = np.zeros_like(values)
        for v, _ in results:
            sq += (v - values) ** 2
        n = len(results)
        meta["mc_stderr"] = np.sqrt(sq / (n * max(n - 1, 1)))
    return FringePattern(base.axis, base.grid, values, base.boundary_cutoff, envelope=env,
                         support=(lo, hi), meta=meta)


def visibility(pattern: FringePattern) -> float:
    """Highest Michelson contrast among the interior minima of the fringe function.

    Raises
    ------
    NoFringe
        If the pattern has no interior minimum.
    """
    census = fringe_census(pattern)
    if not census.fringes:
        raise NoFringe("pattern has no interior fringe")
    return max(f.contrast for f in census.minima)


def _visibility_or_zero(pattern: FringePattern) -> float:
    try:
        return visibility(pattern)
    except NoFringe:
        return 0.0


def tolerable_spread(
    b1: BesselMode,
    b2: BesselMode,
    atom: AtomBeam,
    model: PWAmplitudeModel,
    grid,
    threshold: float,
    sigma_max: Optional[float] = None,
    rtol: float = 1e-3,
    n_quad: int = 16,
    cutoff: float | None = None,
    threads: int = 1,
) -> float:
    """Isotropic momentum spread at which the fringe visibility falls to ``threshold``.

    Bisection over sigma in (0, sigma_max]; the bracket is narrowed to
    relative width ``rtol``.  ``sigma_max`` defaults to kappa1 + kappa2.

    Raises
    ------
    NeverVisible
        If the unsmeared visibility is already below ``threshold``.
    AlwaysVisible
        If the visibility at ``sigma_max`` is still above ``threshold``.
    """
    if not 0 < threshold < 1:
        raise PhysicsError("0 < threshold < 1", f"threshold={threshold!r}")

    def vis(sigma):
        spread = MomentumSpread.isotropic(sigma, n_quad=n_quad, method="quadrature")
        return _visibility_or_zero(smear_pattern(b1, b2, atom, model, grid, spread, cutoff, threads))

    v0 = vis(0.0)
    if v0 < threshold:
        raise NeverVisible(f"unsmeared visibility {v0!r} below threshold {threshold!r}")
    hi = (b1.kappa + b2.kappa) if sigma_max is None else float(sigma_max)
    v_hi = vis(hi)
    if v_hi >= threshold:
        raise AlwaysVisible(f"visibility {v_hi!r} at sigma_p={hi!r} still above threshold {threshold!r}")
    # geometric search for a lower bracket keeps the bisection short
    lo = hi
    while True:
        lo *= 0.1
        if lo < 1e-12 * hi:
            lo = 0.0
            break
        if vis(lo) >= threshold:
            break
        hi = lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi) if lo > 0 and hi / lo < 4 else (math.sqrt(lo * hi) if lo > 0 else 0.5 * hi)
        if vis(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
