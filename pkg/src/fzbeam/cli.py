"""Command-line front end: config ingestion, experiment selection, and
plot-ready CSV emission with JSON manifests and rendered figures.

Subcommands: ``design`` (per-element phases for one placement), ``spectrum``
(gain against frequency per method), ``rate-sweep`` (Monte Carlo rate
table), ``gamma-study`` (3 dB-bandwidth constant over random placements).

Every option can also come from the environment (``FZBEAM_*``); a flag beats
the environment, which beats the config file.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import configio, plots
from .analysis import ideal_gain, split_metrics
from .beamformers import (PhaseProfile, gsa_profile, narrowband_phases,
                          profile_to_weights, spm_profile, vsa_phases,
                          weights_to_csv)
from .channel import Weights
from .evaluation import (EvalContext, fresnel_gain_spectrum,
                         oracle_gain_spectrum, run_sweep)
from .scenario import sample_placement

ENV_PREFIX = "FZBEAM_"

PHYSICAL_METHODS = ("narrowband", "vsa", "fz-spm", "fz-gsa")


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fzbeam",
        description="Fresnel-zone wideband RIS beamforming simulator")
    parser.add_argument("--config", help="key-value config file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", help="output directory (default: current)")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps")
    parser.add_argument("--method", help="comma-separated method list override")
    parser.add_argument("--quantize-bits", type=int, dest="quantize_bits",
                        help="phase-shifter resolution override")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("design", help="emit per-element phase CSVs for one placement")
    sub.add_parser("spectrum", help="emit gain-vs-frequency CSV for one placement")
    sub.add_parser("rate-sweep", help="emit the Monte Carlo rate table")
    gamma = sub.add_parser("gamma-study",
                           help="emit the 3 dB-bandwidth constant study")
    gamma.add_argument("--count", type=int, default=None,
                       help="number of random placements (default 300)")
    return parser


def _gather_settings(args) -> dict:
    """Apply the flag > environment > file precedence for shared options."""
    settings = {}
    for key, cast in (("config", str), ("seed", int), ("out", str),
                      ("threads", int), ("method", str), ("quantize_bits", int)):
        flag = getattr(args, key, None)
        env = _env(key)
        if flag is not None:
            settings[key] = flag
        elif env is not None:
            settings[key] = cast(env)
    return settings


def _load(settings: dict):
    config, spec, placement, resolved = configio.parse_config(settings.get("config"))
    if "seed" in settings:
        spec = replace(spec, seed=int(settings["seed"]))
        resolved["seed"] = int(settings["seed"])
    if "threads" in settings:
        spec = replace(spec, threads=max(1, int(settings["threads"])))
    if "method" in settings:
        methods = tuple(m.strip() for m in settings["method"].split(",") if m.strip())
        spec = replace(spec, methods=methods)
        resolved["methods"] = list(methods)
    if "quantize_bits" in settings:
        bits = int(settings["quantize_bits"])
        config.phase_bits = bits
        config.validate()
        resolved["quantize_bits"] = bits
    out_dir = Path(settings.get("out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    return config, spec, placement, resolved, out_dir


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _design_weights(method: str, config, spec, ctx: EvalContext) -> Weights:
    if method == "narrowband":
        return narrowband_phases(ctx.grid, ctx.placement, config.carrier_hz)
    if method == "vsa":
        return vsa_phases(ctx.grid, ctx.placement, config.band, spec.vsa_subarrays)
    if method == "fz-spm":
        return profile_to_weights(spm_profile(ctx.profile, config.band),
                                  ctx.grid, ctx.placement)
    if method == "fz-gsa":
        return profile_to_weights(gsa_profile(ctx.profile, config.band, spec.gsa),
                                  ctx.grid, ctx.placement)
    raise ValueError(f"method {method!r} has no element weights")


def cmd_design(config, spec, placement, resolved, out_dir, argv) -> int:
    ctx = EvalContext(config, placement)
    emitted = []
    for method in spec.methods:
        if method not in PHYSICAL_METHODS:
            print(f"design: skipping {method} (no element weights)", file=sys.stderr)
            continue
        weights = _design_weights(method, config, spec, ctx)
        path = out_dir / f"weights_{method}.csv"
        weights_to_csv(weights, ctx.grid, path, bits=config.phase_bits)
        emitted.append(path)
        print(f"wrote {path}")
    manifest = configio.manifest_for("design", argv, spec.seed, resolved)
    manifest.write(out_dir / "design.manifest.json")
    return 0 if emitted else 1


def cmd_spectrum(config, spec, placement, resolved, out_dir, argv) -> int:
    ctx = EvalContext(config, placement)
    n_points = 1201
    f_grid = np.linspace(config.carrier_hz - config.bandwidth_hz,
                         config.carrier_hz + config.bandwidth_hz, n_points)
    columns: dict[str, np.ndarray] = {}
    for method in spec.methods:
        if method in ("upper-bound", "optimal"):
            columns[method] = ideal_gain(ctx.profile, config).evaluate(f_grid)
        elif method == "vsa":
            weights = vsa_phases(ctx.grid, ctx.placement, config.band, spec.vsa_subarrays)
            columns[method] = oracle_gain_spectrum(
                ctx.grid, ctx.placement, weights, f_grid,
                n_bs=config.bs_antennas).magnitude
        elif method == "narrowband":
            prof = PhaseProfile.carrier(config.carrier_hz, ctx.profile.a)
            columns[method] = fresnel_gain_spectrum(ctx.profile, prof, f_grid).magnitude
        elif method == "fz-spm":
            prof = spm_profile(ctx.profile, config.band)
            columns[method] = fresnel_gain_spectrum(ctx.profile, prof, f_grid).magnitude
        elif method == "fz-gsa":
            prof = gsa_profile(ctx.profile, config.band, spec.gsa)
            columns[method] = fresnel_gain_spectrum(ctx.profile, prof, f_grid).magnitude
        else:
            print(f"spectrum: skipping {method}", file=sys.stderr)
    csv_path = out_dir / "spectrum.csv"
    header = ["f_hz"] + [f"gain_abs_{m}" for m in columns]
    rows = ([float(f)] + [float(columns[m][i]) for m in columns]
            for i, f in enumerate(f_grid))
    _write_csv(csv_path, header, rows)
    plots.spectrum_figure(f_grid, columns, out_dir / "spectrum.png")
    manifest = configio.manifest_for("spectrum", argv, spec.seed, resolved)
    manifest.write(out_dir / "spectrum.manifest.json")
    print(f"wrote {csv_path} and {out_dir / 'spectrum.png'}")
    return 0


def cmd_rate_sweep(config, spec, placement, resolved, out_dir, argv) -> int:
    cells = run_sweep(spec, config)
    csv_path = out_dir / "rate_sweep.csv"
    _write_csv(csv_path,
               ["sweep_value", "method", "mean_rate_bps", "stderr", "trials"],
               ((c.sweep_value, c.method, c.mean_rate_bps, c.stderr_bps, c.trials)
                for c in cells))
    plots.rate_sweep_figure(cells, spec.sweep, out_dir / "rate_sweep.png")
    manifest = configio.manifest_for("rate-sweep", argv, spec.seed, resolved)
    errors = [e for c in cells for e in c.errors]
    if errors:
        manifest.notes = manifest.notes + [f"cell errors: {len(errors)}"] + errors[:20]
        print(f"rate-sweep finished with {len(errors)} per-cell errors", file=sys.stderr)
    manifest.write(out_dir / "rate_sweep.manifest.json")
    print(f"wrote {csv_path} and {out_dir / 'rate_sweep.png'}")
    return 0


def cmd_gamma_study(config, spec, placement, resolved, out_dir, argv, count) -> int:
    n = 300 if count is None else count
    rows = []
    gammas = []
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, i]))
        p = sample_placement(rng, spec.bs_range, spec.ue_range)
        metrics = split_metrics(p, config)
        rows.append((i, metrics.iota, metrics.b3db_exact_hz, metrics.gamma))
        gammas.append(metrics.gamma)
    csv_path = out_dir / "gamma_study.csv"
    _write_csv(csv_path, ["placement", "iota", "b3db_exact_hz", "gamma"], rows)
    plots.gamma_histogram(gammas, out_dir / "gamma_study.png")
    manifest = configio.manifest_for("gamma-study", argv, spec.seed, resolved)
    manifest.write(out_dir / "gamma_study.manifest.json")
    finite = [g for g in gammas if np.isfinite(g)]
    if finite:
        print(f"median gamma over {len(finite)} placements: {np.median(finite):.4f}")
    print(f"wrote {csv_path} and {out_dir / 'gamma_study.png'}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("fzbeam: a subcommand is required", file=sys.stderr)
        return 2
    try:
        settings = _gather_settings(args)
        config, spec, placement, resolved, out_dir = _load(settings)
        if args.command == "design":
            return cmd_design(config, spec, placement, resolved, out_dir, argv)
        if args.command == "spectrum":
            return cmd_spectrum(config, spec, placement, resolved, out_dir, argv)
        if args.command == "rate-sweep":
            return cmd_rate_sweep(config, spec, placement, resolved, out_dir, argv)
        if args.command == "gamma-study":
            return cmd_gamma_study(config, spec, placement, resolved, out_dir,
                                   argv, args.count)
        parser.print_usage(sys.stderr)
        return 2
    except configio.ConfigError as exc:
        print(f"fzbeam: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"fzbeam: error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
