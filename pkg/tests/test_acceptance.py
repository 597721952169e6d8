"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected into the terminal summary of any pytest run.
"""

import math
import time
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.integrate import quad

from twistkin import (
    AtomBeam,
    BesselMode,
    LineProfile,
    LineSetup,
    MeasurementSet,
    MomentumSpread,
    PWAmplitudeModel,
    ReconstructionConfig,
    TransferVector,
    azimuthal_distribution,
    detuning_scan,
    detuning_window_rest,
    forward_pattern,
    fringe_census,
    invert_lineshape,
    sample_kicks,
    smear_pattern,
    tolerable_spread,
    triangle_geometry,
    twisted_amplitude,
    visibility,
    xsec_density,
)
from twistkin.cli import SUBCOMMANDS, main, run_subcommand
from twistkin.config import parse_config, parse_config_text
from twistkin.oracle import RingRegularization, convergence_order, convergence_table, ring_quadrature_amplitude
from twistkin.smearing import _visibility_or_zero
from twistkin.spectra import FringePattern, detuning_support, trimmed_annulus

from conftest import ACCEPTANCE, photon_pair, sign_change_count
from test_config_cli import SMALL, write_cfg

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
MASS = 1e10
REST = AtomBeam(MASS, (0.0, 0.0, 0.0), 2.0)


def verdict(n: int, ok: bool, detail: str):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def test_criterion_1_rest_window(tmp_path):
    text = '{"photon1": {"omega": 1.0, "kappa": 0.1, "m": 1}, "photon2": {"omega": 1.0, "kappa": 0.1, "m": 1},' \
           ' "atom": {"mass": 1.0e10}}'
    t0 = time.perf_counter()
    cfg = parse_config_text(text)
    code, summary = run_subcommand("window", cfg, tmp_path)
    dt = time.perf_counter() - t0
    lo, hi = summary["rest"]
    kz = cfg.photon1.kz + cfg.photon2.kz
    ok = (code == 0 and kz == 0.0 and lo == 0.0 and abs(hi - 2e-12) <= 1e-9 * 2e-12
          and 0.5 <= hi / 1e-12 <= 2.0 * (1 + 1e-12) and dt < 1.0)
    verdict(1, ok, f"delta_max={hi:.6g} eV, {dt:.3f} s")


def test_criterion_2_crossed_window(tmp_path):
    cfg = parse_config(CONFIGS / "crossed.json")
    assert cfg.photon1.kappa + cfg.photon2.kappa == 0.2 and cfg.atom.beta == 0.5
    assert cfg.section("scan")["n"] == 200
    t0 = time.perf_counter()
    code, summary = run_subcommand("crossed", cfg, tmp_path)
    dt = time.perf_counter() - t0
    lo, hi = summary["support"]
    nz_lo, nz_hi = summary["nonzero_range"]
    ok = (code == 0 and abs(lo + 0.1) < 0.01 * 0.1 and abs(hi - 0.1) < 0.01 * 0.1
          and lo <= nz_lo and nz_hi <= hi and dt < 10.0)
    verdict(2, ok, f"support=[{lo:.6g}, {hi:.6g}] eV, samples nonzero on [{nz_lo:.4g}, {nz_hi:.4g}], {dt:.2f} s")


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(2024)
    model = PWAmplitudeModel.constant()
    t0 = time.perf_counter()
    worst, orders = 0.0, []
    for _ in range(20):
        k1, k2 = rng.uniform(0.05, 0.15, 2)
        lo, hi = abs(k1 - k2), k1 + k2
        kp = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
        m1, m2 = (int(m) for m in rng.integers(-5, 6, 2))
        b1, b2 = photon_pair(k1, k2, m1, m2)
        K = TransferVector(kp, rng.uniform(0, 2 * math.pi), b1.kz + b2.kz)
        s0 = 1e-3 * min(k1, k2)
        rows = convergence_table(b1, b2, K, model, [8 * s0, 4 * s0, 2 * s0, s0])
        worst = max(worst, abs(rows[-1].ratio - 1))
        orders.append(convergence_order(rows))
    dt = time.perf_counter() - t0
    # the bar is O(sigma); measured convergence is at least that fast
    ok = worst <= 0.01 and min(orders) >= 0.9 and dt < 300
    verdict(3, ok, f"max |ratio-1|={worst:.2e} at sigma=1e-3 min(kappa), min order={min(orders):.2f}, {dt:.1f} s")


def test_criterion_4_three_four_five_zero():
    b1, b2 = BesselMode.photon(10.0, 3.0, 1, 1), BesselMode.photon(10.0, 4.0, 1, -1)
    K = TransferVector(5.0, 0.3, b1.kz + b2.kz)
    model = PWAmplitudeModel.constant()
    t0 = time.perf_counter()
    exact = abs(twisted_amplitude(b1, b2, K, model).value)
    num = abs(ring_quadrature_amplitude(b1, b2, K, model, RingRegularization(1e-3 * 3.0)))
    dt = time.perf_counter() - t0
    scale = 3.0 * 4.0 / (2.0 * triangle_geometry(3.0, 4.0, 5.0).area) * abs(model.m0)
    ok = exact <= 1e-12 * scale and num <= 1e-2 * scale and dt < 30
    verdict(4, ok, f"|J_analytic|={exact:.1e}, |J_numeric|={num:.2e} <= {1e-2 * scale:.2e}, {dt:.2f} s")


def test_criterion_5_azimuthal_uniformity():
    model = PWAmplitudeModel.constant()
    spreads = []
    for k1, k2, m1, m2 in [(0.1, 0.08, 3, -2), (0.1, 0.1, 1, 1), (0.07, 0.12, -5, 4)]:
        b1, b2 = photon_pair(k1, k2, m1, m2)
        r_in, r_out = trimmed_annulus(b1, b2)
        p = azimuthal_distribution(b1, b2, model, 0.5 * (r_in + r_out), n_phi=360)
        spreads.append(float((p.values.max() - p.values.min()) / p.values.max()))
    b1, b2 = photon_pair(0.1, 0.08, 3, -2)
    ev = sample_kicks(b1, b2, REST, model, 100_000, seed=5)
    counts, _ = np.histogram(ev.phi_k, bins=36, range=(0.0, 2 * math.pi))
    pval = stats.chisquare(counts).pvalue
    ok = max(spreads) <= 1e-12 and pval > 0.01 and counts.sum() == 100_000
    verdict(5, ok, f"max relative spread={max(spreads):.1e}, chi2 p={pval:.3f} (1e5 events, 36 bins)")


def test_criterion_6_census_determinism():
    rng = np.random.default_rng(6)
    model = PWAmplitudeModel.constant()
    results = []
    for _ in range(10):
        k1, k2 = rng.uniform(0.05, 0.15, 2)
        m1, m2 = (int(m) for m in rng.integers(-10, 11, 2))
        b1, b2 = photon_pair(k1, k2, m1, m2)
        kz = b1.kz + b2.kz
        lo, hi = detuning_window_rest(k1, k2, kz, MASS)
        p = detuning_scan(b1, b2, REST, model, np.linspace(lo, hi, 100_000))
        on = p.values > 0
        kp = np.sqrt(2 * MASS * p.grid[on] - kz * kz)
        results.append((fringe_census(p).count, sign_change_count(m1, m2, k1, k2, kp)))
    ok = all(a == b for a, b in results)
    verdict(6, ok, "census/oracle counts " + " ".join(f"{a}/{b}" for a, b in results))


def _line_setup(n_axis=1200, grid_n=41):
    # axis spacing below a quarter of the profile step
    b1, b2 = photon_pair(0.1, 0.08, 1, 1)
    lo, hi = detuning_support(b1, b2, REST)
    h = (hi - lo) / 200
    egrid = (np.arange(grid_n) - grid_n // 2) * h
    axis = np.linspace(lo - grid_n * h, hi + grid_n * h, n_axis)
    return LineSetup(b1, b2, REST, PWAmplitudeModel.constant(), axis), egrid, h


def _measure(setup, truth, settings, noise, seed):
    rng = np.random.default_rng(seed)
    pats, sig = [], []
    for s in settings:
        p = forward_pattern(truth, s, setup)
        vals = p.values
        if noise:
            vals = np.maximum(vals + rng.normal(0.0, noise * vals.max(), vals.size), 0.0)
        pats.append(FringePattern("detuning_eV", p.grid, vals, p.boundary_cutoff))
        sig.append(np.full(vals.size, max(noise, 1e-3) * p.values.max()))
    return MeasurementSet.from_setup(setup, settings, pats, sig)


def test_criterion_7_lineshape_round_trip():
    t0 = time.perf_counter()
    setup, egrid, h = _line_setup()
    truth = LineProfile.lorentzian(egrid, 5 * h)
    settings = [(m, m) for m in range(1, 9)]
    errs = []
    for noise in (0.0, 0.01):
        ms = _measure(setup, truth, settings, noise, seed=3)
        prof, diag = invert_lineshape(ms, ReconstructionConfig(egrid), setup)
        errs.append(float(np.linalg.norm(prof.weights - truth.weights) / np.linalg.norm(truth.weights)))
    dt = time.perf_counter() - t0
    ok = errs[0] < 0.05 and errs[1] < 0.15 and dt < 120
    verdict(7, ok, f"relative L2 error noise-free={errs[0]:.2e}, 1% noise (L-curve)={errs[1]:.3f}, {dt:.1f} s")


def test_criterion_8_smearing_limits():
    b1, b2 = photon_pair(0.1, 0.08, 3, 3)
    model = PWAmplitudeModel.constant()
    lo, hi = detuning_window_rest(0.1, 0.08, b1.kz + b2.kz, MASS)
    w = hi - lo
    grid = np.linspace(lo - 0.1 * w, hi + 0.1 * w, 601)
    base = detuning_scan(b1, b2, REST, model, grid)
    zero = smear_pattern(b1, b2, REST, model, grid, MomentumSpread(method="quadrature"))
    bitwise = np.array_equal(zero.values, base.values) and np.array_equal(zero.envelope, base.envelope)
    ladder = np.linspace(0.0, 0.03, 10)
    vis = [_visibility_or_zero(smear_pattern(b1, b2, REST, model, grid,
                                             MomentumSpread.isotropic(s, method="quadrature"))) for s in ladder]
    monotone = all(b <= a + 1e-12 for a, b in zip(vis, vis[1:]))
    s_star = tolerable_spread(b1, b2, REST, model, grid, 0.5)
    v_star = visibility(smear_pattern(b1, b2, REST, model, grid, MomentumSpread.isotropic(s_star, method="quadrature")))
    ok = bitwise and monotone and abs(v_star - 0.5) <= 0.01
    verdict(8, ok, f"bitwise={bitwise}, ladder {vis[0]:.3f}->{vis[-1]:.3f} monotone={monotone}, "
                   f"visibility at sigma*={s_star:.4g} eV is {v_star:.4f}")


def test_criterion_9_mc_vs_density():
    b1, b2 = photon_pair(0.1, 0.07, 3, 2)
    model = PWAmplitudeModel.constant()
    kz = b1.kz + b2.kz
    t0 = time.perf_counter()
    r_in, r_out = trimmed_annulus(b1, b2)
    assert r_in == abs(0.1 - 0.07) + 1e-4 * 0.17
    edges = np.linspace(r_in, r_out, 51)

    def density(k):
        return 2 * math.pi * k * xsec_density(b1, b2, TransferVector(k, 0.0, kz), REST, model, check_energy=False)

    parts = np.array([quad(density, a, b, limit=400, epsabs=0.0, epsrel=1e-10)[0] for a, b in zip(edges[:-1], edges[1:])])
    prob = parts / parts.sum()
    ev = sample_kicks(b1, b2, REST, model, 1_000_000, seed=2024)
    counts, _ = np.histogram(ev.k_perp, edges)
    n = counts.sum()
    chi2 = float(np.sum((counts - n * prob) ** 2 / (n * prob)))
    ndf = len(prob) - 1
    pull = float(np.max(np.abs(counts - n * prob) / np.sqrt(n * prob)))
    dt = time.perf_counter() - t0
    ok = n == 1_000_000 and abs(chi2 - ndf) <= 3 * math.sqrt(2 * ndf) and dt < 120
    verdict(9, ok, f"chi2={chi2:.1f} for ndf={ndf} (3 sigma band {3 * math.sqrt(2 * ndf):.1f}), max pull={pull:.2f}, {dt:.1f} s")


def test_criterion_10_determinism(tmp_path):
    mismatched = []
    for name in SUBCOMMANDS:
        data = SMALL
        if name == "crossed":
            data = dict(SMALL, atom={"mass": 1.0e10, "p": [5.0e9, 0.0, 0.0]},
                        photon2={"omega": 1.0, "kappa": 0.1, "m": 1})
        path = write_cfg(tmp_path / f"{name}.json", data)
        runs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}-{tag}"
            assert main([name, "--config", str(path), "--out", str(out)]) == 0
            runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if runs[0] != runs[1]:
            mismatched.append(name)
    verdict(10, not mismatched, f"{len(SUBCOMMANDS)} subcommands byte-identical" if not mismatched
            else f"differs: {mismatched}")
