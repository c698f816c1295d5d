"""Configuration-driven command line: `kp run <config.json>`.

Modes: simulate (march the IVP and stream conserved-quantity diagnostics),
norms (norm reports for a preset field), verify (estimate battery), and
counterexample (bilinear-sharpness N-sweep).  Each run writes CSV reports,
a matplotlib figure per report, and a gnuplot script per report into the
output directory.

Exit codes: 0 success, 2 config error, 3 numerical blow-up, 4
acceptance-threshold failure in verify/counterexample modes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional

import numpy as np

from . import counterexample as cx
from . import estimates, norms, presets, reports
from .evolution import BlowupError, SolverConfig, simulate
from .norms import NormReport
from .spectral import DispersionParams, Field2D, Grid2D


class ConfigError(ValueError):
    pass


_SCHEMA: Dict[str, Optional[set]] = {
    "mode": None,
    "output_dir": None,
    "grid": {"Lx", "Ly", "Nx", "Ny", "Nt", "Lt"},
    "physics": {"gamma", "beta"},
    "solver": {
        "dt", "T", "dealias", "stepper", "picard_max_iters", "picard_tol",
        "picard_slices", "picard_tbox", "picard_eps0", "smallness_threshold",
        "diag_every",
    },
    "initial_data": {
        "preset", "amplitude", "sigma_x", "sigma_y", "kx", "ky", "seed",
        "kx_band", "ky_band", "target_ep_norm",
    },
    "norms": {"s", "r", "b", "eps"},
    "verify": {"estimates", "seeds", "seed_base", "battery", "thresholds"},
    "counterexample": {"N", "eps", "resolution", "out_resolution", "slope_windows"},
}
_BATTERY_KEYS = {"L2d", "N2d", "Lst", "Nst", "Lt", "Nt", "refine"}
_RESOLUTION_KEYS = {"n_xi", "n_mu", "n_tau"}
_THRESHOLD_KEYS = {"resonance_dev", "gradient_max", "max_ratio"}
_MODES = ("simulate", "norms", "verify", "counterexample")


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for key, sub in cfg.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key: {key}")
        allowed = _SCHEMA[key]
        if allowed is not None:
            if not isinstance(sub, dict):
                raise ConfigError(f"{key} must be an object")
            for k2 in sub:
                if k2 not in allowed:
                    raise ConfigError(f"unknown key: {key}.{k2}")
    for k2 in cfg.get("verify", {}).get("battery", {}) or {}:
        if k2 not in _BATTERY_KEYS:
            raise ConfigError(f"unknown key: verify.battery.{k2}")
    for k2 in cfg.get("verify", {}).get("thresholds", {}) or {}:
        if k2 not in _THRESHOLD_KEYS:
            raise ConfigError(f"unknown key: verify.thresholds.{k2}")
    for blk in ("resolution", "out_resolution"):
        for k2 in cfg.get("counterexample", {}).get(blk, {}) or {}:
            if k2 not in _RESOLUTION_KEYS:
                raise ConfigError(f"unknown key: counterexample.{blk}.{k2}")

    mode = cfg.get("mode")
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got {mode!r}")
    required = {
        "simulate": ("grid",),
        "norms": ("grid",),
        "verify": (),
        "counterexample": ("counterexample",),
    }[mode]
    for blk in required:
        if blk not in cfg:
            raise ConfigError(f"mode {mode} requires the {blk} block")

    g = cfg.get("grid", {})
    for k in ("Lx", "Ly", "Lt"):
        if k in g and not (isinstance(g[k], (int, float)) and g[k] > 0):
            raise ConfigError(f"grid.{k} must be a positive number")
    for k in ("Nx", "Ny", "Nt"):
        if k in g and not (isinstance(g[k], int) and g[k] > 0 and g[k] % 2 == 0):
            raise ConfigError(f"grid.{k} must be a positive even integer")
    ph = cfg.get("physics", {})
    if "gamma" in ph and ph["gamma"] == 0:
        raise ConfigError("physics.gamma must be nonzero")
    sv = cfg.get("solver", {})
    for k in ("dt", "T", "picard_tol"):
        if k in sv and not sv[k] > 0:
            raise ConfigError(f"solver.{k} must be positive")
    ce = cfg.get("counterexample", {})
    if mode == "counterexample":
        if len(ce.get("N", [])) < 4:
            raise ConfigError("counterexample.N needs at least 4 values")
        if not ce.get("eps"):
            raise ConfigError("counterexample.eps must be a nonempty list")


def _build_grid(cfg: dict) -> Grid2D:
    g = cfg.get("grid", {})
    return Grid2D(
        g.get("Lx", 32.0 * math.pi),
        g.get("Ly", 32.0 * math.pi),
        g.get("Nx", 256),
        g.get("Ny", 256),
    )


def _build_params(cfg: dict) -> DispersionParams:
    ph = cfg.get("physics", {})
    return DispersionParams(gamma=ph.get("gamma", -1.0), beta=ph.get("beta", 1.0))


def _build_field(cfg: dict, grid: Grid2D, seed_override: Optional[int]) -> Field2D:
    idata = cfg.get("initial_data", {"preset": "gaussian"})
    preset = idata.get("preset", "gaussian")
    if preset == "gaussian":
        return presets.gaussian(
            grid,
            amplitude=idata.get("amplitude", 1.0),
            sigma_x=idata.get("sigma_x", 2.0),
            sigma_y=idata.get("sigma_y", 2.0),
            target_ep_norm=idata.get("target_ep_norm"),
        )
    if preset == "single_mode":
        return presets.single_mode(
            grid, kx=idata.get("kx", 1), ky=idata.get("ky", 0),
            amplitude=idata.get("amplitude", 1.0),
        )
    if preset == "random_band":
        seed = seed_override if seed_override is not None else idata.get("seed", 0)
        return presets.random_band(
            grid, seed=seed, kx_band=idata.get("kx_band", 5),
            ky_band=idata.get("ky_band", 5), amplitude=idata.get("amplitude", 1.0),
        )
    raise ConfigError(f"unknown key: initial_data.preset value {preset!r}")


def _solver_config(cfg: dict) -> SolverConfig:
    sv = dict(cfg.get("solver", {}))
    sv.pop("diag_every", None)
    return SolverConfig(**sv)


def _finish_report(csv_path: str, kind: str, extra=None) -> None:
    reports.emit_plot_script(csv_path)
    png = csv_path.rsplit(".", 1)[0] + ".png"
    if kind == "diagnostics":
        reports.render_diagnostics_figure(csv_path, png)
    elif kind == "estimates":
        reports.render_estimates_figure(csv_path, png)
    elif kind == "sweep":
        reports.render_sweep_figure(csv_path, extra, png)
    elif kind == "norms":
        reports.render_norms_figure(csv_path, png)


def run_simulate(cfg, outdir, stamp, seed_override) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    u0 = _build_field(cfg, grid, seed_override)
    solver = _solver_config(cfg)
    diag_every = cfg.get("solver", {}).get("diag_every", 10)
    result = simulate(u0, solver, params, diag_every=diag_every)
    path = os.path.join(outdir, "diagnostics.csv")
    reports.write_diagnostics_csv(path, result.diagnostics, stamp)
    _finish_report(path, "diagnostics")
    return 0


def run_norms(cfg, outdir, stamp, seed_override) -> int:
    grid = _build_grid(cfg)
    u0 = _build_field(cfg, grid, seed_override)
    prm = cfg.get("norms", {})
    s = prm.get("s", 1.0)
    r = prm.get("r", 0.0)
    reps = [norms.besov_norm(u0, s), norms.weighted_besov_norm(u0, r)]
    e, p = norms.energy_space_norm(u0)
    reps.append(
        NormReport("EP", e + p, (("e", "-", e), ("p", "-", p)), {})
    )
    path = os.path.join(outdir, "norm_report.csv")
    reports.write_norm_report_csv(path, reps, stamp)
    _finish_report(path, "norms")
    return 0


def run_verify(cfg, outdir, stamp, seed_override, threads) -> int:
    vf = cfg.get("verify", {})
    ids = vf.get("estimates", list(estimates.ESTIMATE_IDS))
    nseeds = vf.get("seeds", 50)
    base = seed_override if seed_override is not None else vf.get("seed_base", 0)
    seeds = [base + i for i in range(nseeds)]
    grids = estimates.BatteryGrids(**(vf.get("battery", {}) or {}))
    params = _build_params(cfg)
    thresholds = vf.get("thresholds", {}) or {}

    all_samples: List[estimates.EstimateSample] = []
    summaries: Dict[str, Dict[str, float]] = {}
    failed = False
    for est_id in ids:
        if est_id not in estimates.ESTIMATE_IDS:
            raise ConfigError(f"unknown key: verify.estimates value {est_id!r}")
        samples = estimates.run_battery(est_id, seeds, grids, params, threads=threads)
        all_samples.extend(samples)
        summary = estimates.battery_summary(samples)
        summaries[est_id] = summary
        if not np.isfinite(summary["max_ratio"]):
            failed = True
        if est_id == "resonance" and summary["max_ratio"] > thresholds.get("resonance_dev", 1e-10):
            failed = True
        if est_id == "gradient" and summary["max_ratio"] > thresholds.get("gradient_max", 1.0):
            failed = True
        cap = thresholds.get("max_ratio")
        if cap is not None and summary["max_ratio"] > cap:
            failed = True
    path = os.path.join(outdir, "estimates.csv")
    reports.write_estimates_csv(path, all_samples, summaries, stamp)
    _finish_report(path, "estimates")
    return 4 if failed else 0


def run_counterexample(cfg, outdir, stamp) -> int:
    ce = cfg["counterexample"]
    N_values = ce["N"]
    eps_values = ce["eps"]
    resolution = ce.get("resolution")
    out_resolution = ce.get("out_resolution")
    comps = cx.sweep_components(N_values, resolution, out_resolution)
    evals: List[cx.SideEvaluation] = []
    fits: List[cx.GrowthFit] = []
    failed = False
    windows = ce.get("slope_windows", {}) or {}
    for eps in eps_values:
        fit = cx.growth_fit(N_values, eps, components=comps)
        fits.append(fit)
        evals.extend(fit.evaluations)
        window = windows.get(str(eps)) or windows.get(repr(eps))
        if window is not None and not (window[0] <= fit.slope <= window[1]):
            failed = True
    sweep_path = os.path.join(outdir, "sweep.csv")
    fit_path = os.path.join(outdir, "fit_summary.csv")
    reports.write_sweep_csv(sweep_path, evals, stamp)
    reports.write_fit_csv(fit_path, fits, stamp)
    reports.emit_plot_script(sweep_path)
    reports.emit_plot_script(fit_path)
    reports.render_sweep_figure(sweep_path, fit_path, sweep_path.rsplit(".", 1)[0] + ".png")
    return 4 if failed else 0


def run(config_path, output_dir=None, seed_override=None, threads=None) -> int:
    """Execute one configuration file; returns the process exit code."""
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = output_dir or cfg.get("output_dir", ".")
    os.makedirs(outdir, exist_ok=True)
    stamp = reports.canonical_config(cfg)
    if threads is None:
        threads = int(os.environ.get("KP_THREADS", "1"))

    mode = cfg["mode"]
    try:
        if mode == "simulate":
            return run_simulate(cfg, outdir, stamp, seed_override)
        if mode == "norms":
            return run_norms(cfg, outdir, stamp, seed_override)
        if mode == "verify":
            return run_verify(cfg, outdir, stamp, seed_override, threads)
        return run_counterexample(cfg, outdir, stamp)
    except BlowupError as exc:
        t = f" at t={exc.t}" if exc.t is not None else ""
        print(f"numerical blow-up{t}: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a JSON run configuration")
    p_run.add_argument("config", help="path to the UTF-8 JSON config")
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--seed-override", type=int, default=None, metavar="U64")
    p_run.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    return run(args.config, args.output_dir, args.seed_override, args.threads)


if __name__ == "__main__":
    sys.exit(main())
