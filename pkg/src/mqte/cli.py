"""Command-line entry point: ``mqte run|sweep|oracle|spectrum``.

Exit codes: 0 success, 1 invalid input, 2 infeasible budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as mio
from .noise import BudgetExceeded
from .oracle import reference_peaks
from .runner import (
    ConfigError,
    ExperimentConfig,
    build_model,
    oracle_eigensystem,
    run_experiment,
    run_sweep,
)
from .spectral import detect_peaks, dft_real_even, empirical_sigma, noise_sigma_bound

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2


def _values(text: str, axis: str) -> list:
    items = [v.strip() for v in text.split(",") if v.strip()]
    if not items:
        raise ConfigError(["--values needs at least one entry"])
    try:
        return [int(v) if axis == "shots" else float(v) for v in items]
    except ValueError as exc:
        raise ConfigError([f"bad --values entry: {exc}"]) from exc


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.workers:
        cfg.workers = args.workers
    art = run_experiment(cfg, args.out)
    for c, peaks in art.peaks.items():
        head = ", ".join(f"{p.gap:.4f}" for p in peaks[:5])
        print(f"{c}: {len(peaks)} peaks  [{head}]")
    print(f"wrote {len(art.files)} files to {art.out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    values = _values(args.values, args.axis)
    _, summary = run_sweep(cfg, args.axis, values, args.out)
    for row in summary:
        print(f"{args.axis}={row[args.axis]} {row['config']}: rms={row['noise_floor_rms']:.3g} "
              f"peaks={row['peak_count']}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    h, circuit, ref = build_model(cfg)
    eig = oracle_eigensystem(h, circuit)
    if eig is None:
        raise ConfigError(["register too large for the exact-diagonalization oracle"])
    configs = cfg.configs or [ref]
    peaks = {c: reference_peaks(eig, ref, c, cfg.analysis["weight_floor"]) for c in configs}
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        mio.write_oracle(args.out, eig.energies, peaks, cfg.to_dict(), reference=ref)
        print(f"wrote {args.out}")
    else:
        print(json.dumps({c: [{"gap": g, "weight": w} for g, w in rows]
                          for c, rows in peaks.items()}, indent=2))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    series = mio.read_signal(args.signal, args.delta)
    spec = dft_real_even(series, series.delta)
    shots = series.shots if args.shots is None else args.shots
    bound = noise_sigma_bound(series.n_points, shots)
    sigma = empirical_sigma(spec) if args.sigma == "empirical" else bound
    peaks = detect_peaks(spec, sigma, args.threshold)
    stem = Path(args.signal).with_suffix("")
    out = Path(args.out) if args.out else stem.parent
    out.mkdir(parents=True, exist_ok=True)
    mio.write_spectrum(out / f"{stem.name}_spectrum.csv", spec)
    mio.write_peaks(out / f"{stem.name}_peaks.json", peaks, bound, args.threshold,
                    series.n_points, series.delta, shots, sigma_used=sigma)
    for p in peaks[:10]:
        print(f"bin {p.bin:6d}  gap {p.gap:.6f}  2F {p.amplitude:+.5f}  {p.significance:.1f} sigma")
    print(f"{len(peaks)} peaks")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mqte", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run one experiment from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat an experiment over one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, choices=("shots", "gamma", "delta"))
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact gaps and weights for a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write oracle JSON here instead of printing")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("spectrum", help="DFT and peaks of an existing signal CSV")
    p.add_argument("--signal", required=True)
    p.add_argument("--delta", type=float, help="sampling interval if no sidecar")
    p.add_argument("--shots", type=int, help="shots per point (overrides sidecar)")
    p.add_argument("--threshold", type=float, default=4.0)
    p.add_argument("--sigma", choices=("bound", "empirical"), default="bound")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
