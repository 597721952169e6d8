"""Command-line entry point: ``twistkin <subcommand> --config run.json``.

Each subcommand writes one or more tables (CSV, or JSON with ``--format
json``), optional SVG plots and a ``manifest.json`` holding the resolved
configuration, its SHA-256, the seed and library versions.  Exit status is
0 on success, 2 for invalid input and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import platform
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy

from . import __version__, kernels
from .config import RunConfig, build, parse_config
from .errors import NumericalError, ValidationError
from .kinematics import (
    TransferVector,
    detuning_window_crossed,
    detuning_window_rest,
    triangle_geometry,
)

SUBCOMMANDS = (
    "geometry",
    "window",
    "fringes",
    "angular",
    "azimuthal",
    "crossed",
    "events",
    "oracle",
    "lineshape-forward",
    "lineshape-invert",
    "smear",
)

# column names per output table; part of the file format
COLUMNS = {
    "geometry": ["k_perp_eV", "area_eV2", "delta1_rad", "delta2_rad", "fringe_phase_rad", "fringe_function",
                 "abs_J", "arg_J_rad"],
    "window": ["kind", "delta_min_eV", "delta_max_eV"],
    "fringes": ["detuning_eV", "rate", "envelope", "fringe_function"],
    "fringes_census": ["index", "position_eV", "height", "contrast", "dark"],
    "angular": ["theta_K_rad", "rate", "envelope"],
    "azimuthal": ["phi_K_rad", "rate"],
    "crossed": ["detuning_eV", "rate", "envelope"],
    "events": ["index", "k_perp_eV", "phi_K_rad", "kz_eV", "delta_eV", "weight"],
    "oracle": ["sigma_eV", "abs_numeric", "abs_analytic", "ratio", "phase_diff_rad"],
    "lineshape_forward": ["m1", "m2", "detuning_eV", "rate"],
    "lineshape_profile": ["offset_eV", "weight_per_eV", "truth_per_eV"],
    "lineshape_lcurve": ["lambda", "residual_norm", "smoothness_norm"],
    "smear": ["detuning_eV", "rate", "envelope", "unsmeared_rate"],
    "smear_visibility": ["sigma_p_eV", "visibility"],
}


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Writer:
    """Collects output files and writes them (single writer) with a manifest."""

    def __init__(self, out: Path, fmt: str, svg: bool):
        self.out = out
        self.fmt = fmt
        self.svg = svg
        self.files: List[str] = []

    def table(self, name: str, rows: Sequence[Sequence], columns: Sequence[str] | None = None) -> Path:
        columns = list(COLUMNS[name] if columns is None else columns)
        self.out.mkdir(parents=True, exist_ok=True)
        if self.fmt == "csv":
            path = self.out / f"{name}.csv"
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
            path.write_text(buf.getvalue(), encoding="utf-8", newline="")
        else:
            path = self.out / f"{name}.json"
            data = {"columns": columns, "rows": [[_jsonable(v) for v in row] for row in rows]}
            path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8", newline="")
        self.files.append(path.name)
        return path

    def json(self, name: str, data) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{name}.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")
        self.files.append(path.name)
        return path

    def plot(self, name: str, x, ys: Dict[str, np.ndarray], xlabel: str, ylabel: str, logy: bool = False):
        if not self.svg:
            return None
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        with matplotlib.rc_context({"svg.hashsalt": "twistkin", "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=(6.0, 4.0))
            for label, y in ys.items():
                ax.plot(x, y, label=label, lw=1.0)
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if logy:
                ax.set_yscale("log")
            if len(ys) > 1:
                ax.legend()
            fig.tight_layout()
            path = self.out / f"{name}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
        self.files.append(path.name)
        return path


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def config_hash(resolved) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_manifest(writer: Writer, name: str, cfg: RunConfig):
    manifest = {
        "subcommand": name,
        "config": cfg.resolved,
        "config_sha256": config_hash(cfg.resolved),
        "seed": cfg.seed,
        "versions": {
            "twistkin": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "backend": kernels.BACKEND,
        "outputs": list(writer.files),
    }
    writer.out.mkdir(parents=True, exist_ok=True)
    path = writer.out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")
    return path


# ---------------------------------------------------------------------------
# helpers


def _kz(cfg: RunConfig) -> float:
    return cfg.photon1.kz + cfg.photon2.kz


def detuning_grid(cfg: RunConfig) -> np.ndarray:
    from .spectra import detuning_support

    scan = cfg.section("scan")
    lo, hi = scan["min"], scan["max"]
    if lo is None or hi is None:
        s_lo, s_hi = detuning_support(cfg.photon1, cfg.photon2, cfg.atom, cfg.cutoff)
        pad = scan["margin"] * (s_hi - s_lo)
        lo = s_lo - pad if lo is None else lo
        hi = s_hi + pad if hi is None else hi
    if not hi > lo:
        raise ValidationError(f"scan.max={hi!r} must exceed scan.min={lo!r}")
    return np.linspace(lo, hi, scan["n"])


# ---------------------------------------------------------------------------
# subcommands


def cmd_geometry(cfg: RunConfig, w: Writer) -> dict:
    from .amplitude import twisted_amplitude

    b1, b2 = cfg.photon1, cfg.photon2
    lo, hi = abs(b1.kappa - b2.kappa), b1.kappa + b2.kappa
    n = cfg.section("scan")["n"]
    rows = []
    for kp in np.linspace(lo, hi, n + 2)[1:-1]:
        g = triangle_geometry(b1.kappa, b2.kappa, float(kp), cfg.eps_boundary)
        if g.degenerate:
            continue
        phase = b1.m * g.delta1 + b2.m * g.delta2
        amp = twisted_amplitude(b1, b2, TransferVector(float(kp), 0.0, _kz(cfg)), cfg.model, cfg.eps_boundary)
        rows.append([kp, g.area, g.delta1, g.delta2, phase, math.cos(phase) ** 2, abs(amp.value), amp.phase])
    w.table("geometry", rows)
    arr = np.array(rows)
    w.plot("geometry", arr[:, 0], {"cos^2(Phi)": arr[:, 5]}, "K_perp [eV]", "fringe function")
    return {"n_points": len(rows)}


def cmd_window(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import detuning_support

    b1, b2, atom = cfg.photon1, cfg.photon2, cfg.atom
    rest = detuning_window_rest(b1.kappa, b2.kappa, _kz(cfg), atom.mass_i)
    rows = [["rest", rest[0], rest[1]]]
    summary = {"rest": list(rest)}
    if atom.p_perp > 0:
        crossed = detuning_window_crossed(b1.kappa, b2.kappa, min(atom.beta, 1.0))
        rows.append(["crossed", crossed[0], crossed[1]])
        summary["crossed"] = list(crossed)
    sup = detuning_support(b1, b2, atom, cfg.cutoff)
    rows.append(["support", sup[0], sup[1]])
    summary["support"] = list(sup)
    w.table("window", rows)
    main = rows[1] if atom.p_perp > 0 else rows[0]
    print(f"{main[0]} detuning window: [{main[1]:.6g}, {main[2]:.6g}] eV")
    return summary


def _pattern_rows(p, with_ff=True):
    env = p.envelope if p.envelope is not None else np.full_like(p.values, np.nan)
    if with_ff:
        ff = p.fringe_function()
        return [[x, v, e, f] for x, v, e, f in zip(p.grid, p.values, env, ff)]
    return [[x, v, e] for x, v, e in zip(p.grid, p.values, env)]


def cmd_fringes(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import detuning_scan, fringe_census

    grid = detuning_grid(cfg)
    p = detuning_scan(cfg.photon1, cfg.photon2, cfg.atom, cfg.model, grid, cfg.cutoff)
    census = fringe_census(p)
    w.table("fringes", _pattern_rows(p))
    w.table("fringes_census", [[i, f.position, f.height, f.contrast, f.dark]
                               for i, f in enumerate(census.minima)])
    w.plot("fringes", p.grid, {"rate": p.values}, "detuning [eV]", "rate", logy=False)
    return {"n_fringes": census.count, "excluded_fraction": p.meta["excluded_fraction"]}


def cmd_angular(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import angular_distribution, fringe_census

    scan = cfg.section("scan")
    p = angular_distribution(cfg.photon1, cfg.photon2, cfg.atom, cfg.model, scan["delta"], scan["n_theta"],
                             cfg.cutoff)
    w.table("angular", _pattern_rows(p, with_ff=False))
    w.plot("angular", p.grid, {"rate": p.values}, "theta_K [rad]", "rate")
    out = {"n_points": int(p.grid.size)}
    if p.grid.size > 2:
        out["n_fringes"] = fringe_census(p).count
    return out


def cmd_azimuthal(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import azimuthal_distribution

    b1, b2 = cfg.photon1, cfg.photon2
    scan = cfg.section("scan")
    kp = scan["k_perp"]
    if kp is None:
        kp = 0.5 * (abs(b1.kappa - b2.kappa) + b1.kappa + b2.kappa)
    p = azimuthal_distribution(b1, b2, cfg.model, kp, scan["n_phi"], cfg.cutoff)
    w.table("azimuthal", [[x, v] for x, v in zip(p.grid, p.values)])
    w.plot("azimuthal", p.grid, {"rate": p.values}, "phi_K [rad]", "|J|^2")
    spread = float((p.values.max() - p.values.min()) / p.values.max()) if p.values.max() > 0 else 0.0
    return {"k_perp": kp, "relative_spread": spread}


def cmd_crossed(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import crossed_beam_scan

    grid = detuning_grid(cfg)
    p = crossed_beam_scan(cfg.photon1, cfg.photon2, cfg.atom, cfg.model, grid, cfg.cutoff)
    w.table("crossed", _pattern_rows(p, with_ff=False))
    w.plot("crossed", p.grid, {"rate": p.values}, "detuning [eV]", "rate")
    nz = p.grid[p.values > 0]
    return {
        "support": list(p.support),
        "nonzero_range": [float(nz[0]), float(nz[-1])] if nz.size else None,
        "window_estimate": list(p.meta["window_estimate"]),
    }


def cmd_events(cfg: RunConfig, w: Writer) -> dict:
    from .spectra import sample_kicks

    ev_s = cfg.section("events")
    ev = sample_kicks(cfg.photon1, cfg.photon2, cfg.atom, cfg.model, ev_s["n"], cfg.seed, cfg.cutoff,
                      cfg.threads, ev_s["chunk_size"])
    rows = [[i, k, ph, ev.kz, d, wt] for i, (k, ph, d, wt) in enumerate(zip(ev.k_perp, ev.phi_k, ev.delta, ev.weight))]
    w.table("events", rows)
    if w.svg:
        h, edges = np.histogram(ev.k_perp, bins=50)
        w.plot("events", 0.5 * (edges[1:] + edges[:-1]), {"events": h}, "K_perp [eV]", "count")
    return {"n": len(ev), "acceptance": ev.acceptance, "excluded_fraction": ev.excluded_fraction}


def default_sigmas(cfg: RunConfig) -> List[float]:
    orc = cfg.section("oracle")
    if orc["sigmas"] is not None:
        return [float(s) for s in orc["sigmas"]]
    ring = cfg.section("regularization")["ring_sigma"]
    if ring is not None:
        return [8.0 * ring, 4.0 * ring, 2.0 * ring, ring]
    kmin = min(cfg.photon1.kappa, cfg.photon2.kappa)
    return [kmin * f for f in (0.02, 0.01, 0.005, 0.0025)]


def cmd_oracle(cfg: RunConfig, w: Writer) -> dict:
    from .oracle import convergence_order, convergence_table

    b1, b2 = cfg.photon1, cfg.photon2
    orc = cfg.section("oracle")
    kp = orc["k_perp"]
    if kp is None:
        kp = 0.5 * (abs(b1.kappa - b2.kappa) + b1.kappa + b2.kappa)
    K = TransferVector(kp, orc["phi_k"], _kz(cfg))
    rows = convergence_table(b1, b2, K, cfg.model, default_sigmas(cfg), orc["n_radial"])
    w.table("oracle", [[r.sigma, r.abs_numeric, r.abs_analytic, r.ratio, r.phase_diff] for r in rows])
    w.plot("oracle", np.array([r.sigma for r in rows]), {"|ratio-1|": np.array([abs(r.ratio - 1) for r in rows])},
           "sigma [eV]", "|ratio - 1|", logy=True)
    order = convergence_order(rows)
    print(f"final ratio {_fmt(rows[-1].ratio)}, observed order {order:.3f}")
    return {"final_ratio": rows[-1].ratio, "order": order}


def _line_setup(cfg: RunConfig):
    from .lineshape import LineProfile, LineSetup
    from .spectra import detuning_support

    ls = cfg.section("lineshape")
    lo, hi = detuning_support(cfg.photon1, cfg.photon2, cfg.atom, cfg.cutoff)
    width = hi - lo
    h = ls["grid_step"] if ls["grid_step"] is not None else width / 200.0
    half = (ls["grid_n"] - 1) // 2
    egrid = (np.arange(ls["grid_n"]) - half) * h
    scan = cfg.section("scan")
    pad = abs(egrid[0]) + abs(egrid[-1]) + scan["margin"] * width
    axis = np.linspace(lo - pad, hi + pad, scan["n"])
    setup = LineSetup(cfg.photon1, cfg.photon2, cfg.atom, cfg.model, axis, cfg.cutoff)
    kind = ls["profile"]
    if kind == "delta":
        truth = LineProfile.delta(egrid)
    elif kind == "lorentzian":
        truth = LineProfile.lorentzian(egrid, ls["width_steps"] * h)
    elif kind == "gaussian":
        truth = LineProfile.gaussian(egrid, ls["width_steps"] * h)
    else:
        sep = 0.5 * ls["separation_steps"] * h
        truth = LineProfile.double_line(egrid, -sep, sep)
    settings = [tuple(s) for s in ls["settings"]]
    return setup, truth, settings


def cmd_lineshape_forward(cfg: RunConfig, w: Writer) -> dict:
    from .lineshape import forward_pattern

    setup, truth, settings = _line_setup(cfg)
    rows = []
    curves = {}
    for s in settings:
        p = forward_pattern(truth, s, setup, cfg.threads)
        rows.extend([[s[0], s[1], x, v] for x, v in zip(p.grid, p.values)])
        curves[f"m={s[0]},{s[1]}"] = p.values
    w.table("lineshape_forward", rows)
    w.plot("lineshape_forward", setup.axis, curves, "detuning [eV]", "rate")
    return {"settings": [list(s) for s in settings], "profile": truth.kind}


def read_measurement(path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Measured pattern CSV with columns axis_value, rate, sigma."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"axis_value", "rate", "sigma"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValidationError(f"{path}: CSV needs columns axis_value, rate, sigma")
        data = np.array([[float(r["axis_value"]), float(r["rate"]), float(r["sigma"])] for r in reader])
    if data.size == 0:
        raise ValidationError(f"{path}: no rows")
    return data[:, 0], data[:, 1], data[:, 2]


def cmd_lineshape_invert(cfg: RunConfig, w: Writer, base_dir: Path | None = None) -> dict:
    from .lineshape import MeasurementSet, ReconstructionConfig, forward_pattern, invert_lineshape
    from .spectra import FringePattern

    setup, truth, settings = _line_setup(cfg)
    ls = cfg.section("lineshape")
    patterns, sigmas = [], []
    if ls["measurements"]:
        settings = []
        axis = None
        for item in ls["measurements"]:
            p = Path(item["path"])
            if not p.is_absolute() and base_dir is not None:
                p = base_dir / p
            x, r, s = read_measurement(p)
            if axis is None:
                axis = x
            elif x.shape != axis.shape or not np.allclose(x, axis, rtol=1e-12, atol=0.0):
                raise ValidationError("all measurements must share one detuning axis")
            settings.append(tuple(item["m"]))
            patterns.append(FringePattern("detuning_eV", x, np.maximum(r, 0.0), 0.0))
            sigmas.append(s)
        setup = dataclasses.replace(setup, axis=axis)
        truth_w = np.full(truth.grid.size, np.nan)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        for s in settings:
            p = forward_pattern(truth, s, setup, cfg.threads)
            scale = max(ls["noise"], 1e-3) * p.values.max()
            vals = p.values
            if ls["noise"] > 0:
                vals = np.maximum(vals + rng.normal(0.0, ls["noise"] * p.values.max(), vals.size), 0.0)
            patterns.append(FringePattern("detuning_eV", p.grid, vals, p.boundary_cutoff, meta=p.meta))
            sigmas.append(np.full(vals.size, scale))
        truth_w = truth.weights
    ms = MeasurementSet.from_setup(setup, settings, patterns, sigmas)
    rc = ReconstructionConfig(truth.grid, ls["lambda"], ls["nonnegativity"])
    prof, diag = invert_lineshape(ms, rc, setup, cfg.threads)
    w.table("lineshape_profile", [[e, v, t] for e, v, t in zip(prof.grid, prof.weights, truth_w)])
    w.table("lineshape_lcurve", diag.lcurve.tolist())
    w.plot("lineshape_profile", prof.grid, {"reconstructed": prof.weights, "truth": truth_w}, "offset [eV]",
           "weight [1/eV]")
    out = {
        "lambda": diag.lam,
        "residual_norm": diag.residual_norm,
        "smoothness_norm": diag.smoothness_norm,
        "effective_rank": diag.effective_rank,
        "condition_number": diag.condition_number,
    }
    if not ls["measurements"]:
        out["relative_l2_error"] = float(np.linalg.norm(prof.weights - truth_w) / np.linalg.norm(truth_w))
    return out


def cmd_smear(cfg: RunConfig, w: Writer) -> dict:
    from .errors import AlwaysVisible, NeverVisible
    from .smearing import MomentumSpread, _visibility_or_zero, smear_pattern, tolerable_spread
    from .spectra import detuning_scan

    sm = cfg.section("smearing")
    grid = detuning_grid(cfg)
    b1, b2, atom, model = cfg.photon1, cfg.photon2, cfg.atom, cfg.model
    spread = MomentumSpread(tuple(sm["sigma_p"]), sm["n_quad"], sm["n_mc"], cfg.seed, sm["method"])
    base = detuning_scan(b1, b2, atom, model, grid, cfg.cutoff)
    p = smear_pattern(b1, b2, atom, model, grid, spread, cfg.cutoff, cfg.threads)
    env = p.envelope if p.envelope is not None else np.full_like(p.values, np.nan)
    w.table("smear", [[x, v, e, u] for x, v, e, u in zip(p.grid, p.values, env, base.values)])
    ladder = sm["ladder"]
    if ladder is None:
        ladder = [0.0] + list(np.geomspace(1e-3, 0.2, 9) * min(b1.kappa, b2.kappa))
    vis_rows = []
    for s in ladder:
        sp = MomentumSpread.isotropic(float(s), n_quad=sm["n_quad"], n_mc=sm["n_mc"], seed=cfg.seed,
                                      method=sm["method"])
        vis_rows.append([float(s), _visibility_or_zero(smear_pattern(b1, b2, atom, model, grid, sp, cfg.cutoff,
                                                                       cfg.threads))])
    w.table("smear_visibility", vis_rows)
    w.plot("smear", p.grid, {"smeared": p.values, "unsmeared": base.values}, "detuning [eV]", "rate")
    out = {"visibility": _visibility_or_zero(p)}
    if sm["threshold"] is not None:
        try:
            out["tolerable_sigma_p"] = tolerable_spread(b1, b2, atom, model, grid, sm["threshold"],
                                                        n_quad=sm["n_quad"], cutoff=cfg.cutoff, threads=cfg.threads)
        except (AlwaysVisible, NeverVisible) as exc:
            out["tolerable_sigma_p"] = None
            out["tolerable_note"] = f"{type(exc).__name__}: {exc}"
    return out


HANDLERS = {
    "geometry": cmd_geometry,
    "window": cmd_window,
    "fringes": cmd_fringes,
    "angular": cmd_angular,
    "azimuthal": cmd_azimuthal,
    "crossed": cmd_crossed,
    "events": cmd_events,
    "oracle": cmd_oracle,
    "lineshape-forward": cmd_lineshape_forward,
    "lineshape-invert": cmd_lineshape_invert,
    "smear": cmd_smear,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistkin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"twistkin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__name__.replace("cmd_", "").replace("_", " "))
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration (or a run manifest)")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: output.dir)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--eps-boundary", type=float, default=None)
        p.add_argument("--ring-sigma", type=float, default=None)
    return parser


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    """Fold command-line flags into the resolved configuration (so the manifest records them)."""
    import copy

    from .config import resolve

    raw = copy.deepcopy(cfg.resolved)
    if args.format is not None:
        raw["output"]["format"] = args.format
    if args.svg:
        raw["output"]["svg"] = True
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        raw["seed"] = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        raw["threads"] = args.threads
    if args.eps_boundary is not None:
        raw["regularization"]["eps_boundary"] = args.eps_boundary
    if args.ring_sigma is not None:
        raw["regularization"]["ring_sigma"] = args.ring_sigma
    return build(resolve(raw))


def run_subcommand(name: str, cfg: RunConfig, out_dir: Path | None = None,
                   base_dir: Path | None = None) -> Tuple[int, dict]:
    """Run one subcommand on a loaded configuration; returns (exit code, summary).

    ``out_dir`` overrides ``output.dir`` without entering the manifest, so
    runs written to different directories have identical manifests.
    """
    out = cfg.section("output")
    writer = Writer(Path(out["dir"]) if out_dir is None else Path(out_dir), out["format"], out["svg"])
    try:
        if name == "lineshape-invert":
            summary = HANDLERS[name](cfg, writer, base_dir)
        else:
            summary = HANDLERS[name](cfg, writer)
        writer.json("summary", {k: _jsonable(v) for k, v in summary.items()})
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, {}
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3, {}
    write_manifest(writer, name, cfg)
    return 0, summary


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            cfg = apply_overrides(parse_config(args.config), args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    code, _ = run_subcommand(args.command, cfg, args.out, args.config.parent)
    return code


if __name__ == "__main__":
    sys.exit(main())
