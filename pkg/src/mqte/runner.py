"""End-to-end experiments and parameter sweeps driven by a YAML config.

Pipeline: build model -> evolve -> measure (optionally noisy) -> DFT ->
detect peaks, with the exact-diagonalization oracle written alongside when
the register is small enough. Every output file is listed in a manifest
with its SHA-256 hash.
"""

from __future__ import annotations

import copy
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import io as mio
from .circuits import effective_eigensystem, generate_random_step
from .evolution import build_trotter_circuit
from .hamiltonian import (
    Geometry,
    build_heisenberg_1d,
    build_heisenberg_2d,
    custom_hamiltonian,
    neel_state,
)
from .noise import NoiseModel, noisy_signal
from .oracle import MAX_DIAG_QUBITS, diagonalize, reference_peaks
from .sampling import CircuitPropagator, ExactPropagator, measure_signal
from .spectral import (
    bin_from_gap,
    detect_peaks,
    dft_real_even,
    empirical_sigma,
    noise_sigma_bound,
    plan_sampling,
)

SWEEP_AXES = ("shots", "gamma", "delta")
NOISE_GUARD_BINS = 5
_ORACLE_WEIGHT = 1e-6  # gaps lighter than this do not mask noise-only bins

# accepted keys per section, with defaults for optional entries
_SCHEMA = {
    "model": {"kind": None, "sites": None, "rows": None, "cols": None, "J": 1.0,
              "h": 2.0, "n_qubits": None, "terms": None, "n": None, "depth": 1,
              "seed": 0},
    "evolution": {"mode": "exact", "tau": None},
    "grid": {"delta": None, "N": None, "epsilon": None},
    "noise": {"gamma": 0.0, "mode": "sequential", "C0": None, "sigma_q2": None,
              "depth": "linear", "noisy_prep": False, "budget": 2e10},
    "analysis": {"threshold_multiplier": 4.0, "sigma_mode": "bound",
                 "weight_floor": 0.0, "floor": 1e-12},
}
_TOP_LEVEL = {"model", "reference", "evolution", "grid", "shots", "noise", "analysis",
              "configs", "top_k", "seed", "output", "workers"}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violated field."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    model: dict
    reference: str = "neel"
    evolution: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    shots: int = 0
    noise: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    configs: list | None = None
    top_k: int | None = 8
    seed: int = 0
    output: str = "mqte_out"
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        errors = []
        if not isinstance(raw, dict):
            raise ConfigError(["config must be a mapping"])
        for key in sorted(set(raw) - _TOP_LEVEL):
            errors.append(f"unknown key '{key}'")
        sections = {}
        for name, schema in _SCHEMA.items():
            given = raw.get(name) or {}
            if not isinstance(given, dict):
                errors.append(f"'{name}' must be a mapping")
                given = {}
            for key in sorted(set(given) - set(schema)):
                errors.append(f"unknown key '{name}.{key}'")
            sections[name] = {k: given.get(k, d) for k, d in schema.items()}
        cfg = cls(
            model=sections["model"], reference=raw.get("reference", "neel"),
            evolution=sections["evolution"], grid=sections["grid"],
            shots=raw.get("shots", 0), noise=sections["noise"],
            analysis=sections["analysis"], configs=raw.get("configs"),
            top_k=raw.get("top_k", 8), seed=raw.get("seed", 0),
            output=raw.get("output", "mqte_out"), workers=raw.get("workers", 1),
        )
        errors += cfg._check()
        if errors:
            raise ConfigError(errors)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError([f"cannot parse {path}: {exc}"]) from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "model": dict(self.model), "reference": self.reference,
            "evolution": dict(self.evolution), "grid": dict(self.grid),
            "shots": self.shots, "noise": dict(self.noise),
            "analysis": dict(self.analysis), "configs": self.configs,
            "top_k": self.top_k, "seed": self.seed, "output": self.output,
            "workers": self.workers,
        }

    def _check(self) -> list[str]:
        err = []
        m = self.model
        kind = m["kind"]
        need = {"heisenberg1d": ("sites",), "heisenberg2d": ("rows", "cols"),
                "custom": ("n_qubits", "terms"), "random_circuit": ("n",)}
        if kind not in need:
            err.append(f"model.kind must be one of {sorted(need)}, got {kind!r}")
        else:
            for key in need[kind]:
                if m[key] is None:
                    err.append(f"model.{key} is required for {kind}")
            for key in ("sites", "rows", "cols", "n_qubits", "n", "depth"):
                if m[key] is not None and (not _is_int(m[key]) or m[key] < 1):
                    err.append(f"model.{key} must be a positive integer")
            for key in ("J", "h"):
                if not _is_real(m[key]):
                    err.append(f"model.{key} must be a real number")

        ev = self.evolution
        if ev["mode"] not in ("exact", "trotter"):
            err.append("evolution.mode must be 'exact' or 'trotter'")
        if ev["mode"] == "trotter" and kind != "random_circuit":
            if not _is_real(ev["tau"]) or ev["tau"] <= 0:
                err.append("evolution.tau must be positive in trotter mode")

        g = self.grid
        if not _is_real(g["delta"]) or g["delta"] <= 0:
            err.append("grid.delta must be positive")
        if g["N"] is None and g["epsilon"] is None:
            err.append("grid needs N or epsilon")
        if g["N"] is not None and g["epsilon"] is not None:
            err.append("grid takes N or epsilon, not both")
        if g["N"] is not None and (not _is_int(g["N"]) or g["N"] < 1):
            err.append("grid.N must be an integer >= 1")
        if g["epsilon"] is not None and (not _is_real(g["epsilon"]) or g["epsilon"] <= 0):
            err.append("grid.epsilon must be positive")
        if (ev["mode"] == "trotter" and kind != "random_circuit" and _is_real(ev["tau"])
                and ev["tau"] > 0 and _is_real(g["delta"]) and g["delta"] > 0):
            ratio = g["delta"] / ev["tau"]
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
                err.append("grid.delta must be an integer multiple of evolution.tau")

        if not _is_int(self.shots) or self.shots < 0:
            err.append("shots must be an integer >= 0")
        nz = self.noise
        if not _is_real(nz["gamma"]) or not 0 <= nz["gamma"] <= 1:
            err.append("noise.gamma must lie in [0, 1]")
        if nz["mode"] not in ("independent", "sequential", "analytic"):
            err.append("noise.mode must be independent, sequential or analytic")
        if nz["depth"] not in ("linear", "constant"):
            err.append("noise.depth must be 'linear' or 'constant'")
        if nz["C0"] is not None and (not _is_real(nz["C0"]) or not 0 <= nz["C0"] <= 1):
            err.append("noise.C0 must lie in [0, 1]")
        if _is_real(nz["gamma"]) and nz["gamma"] > 0:
            if kind != "random_circuit" and ev["mode"] != "trotter":
                err.append("circuit noise needs evolution.mode 'trotter' or a random circuit")
            if nz["mode"] != "analytic" and _is_int(self.shots) and self.shots == 0:
                err.append("trajectory noise modes need shots > 0")

        a = self.analysis
        if not _is_real(a["threshold_multiplier"]) or a["threshold_multiplier"] <= 0:
            err.append("analysis.threshold_multiplier must be positive")
        if a["sigma_mode"] not in ("bound", "empirical"):
            err.append("analysis.sigma_mode must be 'bound' or 'empirical'")
        if not _is_real(a["weight_floor"]) or a["weight_floor"] < 0:
            err.append("analysis.weight_floor must be >= 0")

        if self.configs is not None and (not isinstance(self.configs, list) or not all(
                isinstance(c, str) and set(c) <= {"0", "1"} for c in self.configs)):
            err.append("configs must be a list of bitstrings")
        if self.top_k is not None and (not _is_int(self.top_k) or self.top_k < 1):
            err.append("top_k must be a positive integer or null")
        if not _is_int(self.seed) or self.seed < 0:
            err.append("seed must be a non-negative integer")
        if not _is_int(self.workers) or self.workers < 1:
            err.append("workers must be a positive integer")
        if not isinstance(self.reference, str):
            err.append("reference must be a bitstring or 'neel'")
        return err

    @property
    def n_points(self) -> int:
        if self.grid["N"] is not None:
            return int(self.grid["N"])
        return plan_sampling(self.grid["delta"], self.grid["epsilon"]).n_points

    @property
    def ideal(self) -> bool:
        return self.shots == 0 and self.noise["gamma"] == 0


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) \
        and math.isfinite(x)


@dataclass
class RunArtifacts:
    out_dir: Path
    signals: dict
    spectra: dict
    peaks: dict  # config -> list[Peak]
    sigma: dict  # config -> sigma used for thresholding
    oracle_peaks: dict | None
    manifest: dict
    files: dict = field(default_factory=dict)


def build_model(cfg: ExperimentConfig):
    """(hamiltonian or None, circuit or None, reference bitstring)."""
    m = cfg.model
    delta = float(cfg.grid["delta"])
    circuit = None
    h = None
    if m["kind"] == "random_circuit":
        circuit = generate_random_step(m["n"], m["depth"], m["seed"], delta)
        geo = Geometry.chain(m["n"])
    else:
        if m["kind"] == "heisenberg1d":
            h = build_heisenberg_1d(m["sites"], m["J"], m["h"])
        elif m["kind"] == "heisenberg2d":
            h = build_heisenberg_2d(m["rows"], m["cols"], m["J"], m["h"])
        else:
            h = custom_hamiltonian(m["n_qubits"], m["terms"])
        geo = h.geometry
        if cfg.evolution["mode"] == "trotter":
            circuit = build_trotter_circuit(h, cfg.evolution["tau"])
    n_qubits = circuit.n_qubits if circuit is not None else h.n_qubits
    ref = cfg.reference
    if ref == "neel":
        ref = neel_state(geo) if geo.kind != "custom" else "01" * (n_qubits // 2) + "0" * (n_qubits % 2)
    if len(ref) != n_qubits or set(ref) - {"0", "1"}:
        raise ConfigError([f"reference {ref!r} is not a {n_qubits}-bit string"])
    if cfg.configs and any(len(c) != n_qubits for c in cfg.configs):
        raise ConfigError([f"configs must be {n_qubits}-bit strings"])
    return h, circuit, ref


def oracle_eigensystem(h, circuit):
    if h is not None:
        return diagonalize(h) if h.n_qubits <= MAX_DIAG_QUBITS else None
    if circuit is not None and circuit.n_qubits <= 10:
        return effective_eigensystem(circuit)
    return None


def noise_only_mask(n_points: int, delta: float, gaps, guard: int = NOISE_GUARD_BINS):
    """Bins k >= 1 at least ``guard`` bins away from every listed gap."""
    k = np.arange(n_points + 1)
    mask = k >= 1
    gaps = np.asarray(list(gaps), dtype=float)
    if gaps.size:
        pos = bin_from_gap(gaps, n_points, delta)
        dist = np.min(np.abs(k[:, None] - pos[None, :]), axis=1)
        mask &= dist >= guard
    return mask


def _slug(x) -> str:
    return str(x).replace(".", "p").replace("-", "m")


def run_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True) -> RunArtifacts:
    timings = {}
    t0 = time.perf_counter()
    h, circuit, ref = build_model(cfg)
    delta = float(cfg.grid["delta"])
    n_points = cfg.n_points
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    eig = oracle_eigensystem(h, circuit)
    timings["oracle"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    gamma = float(cfg.noise["gamma"])
    if gamma > 0:
        model = NoiseModel(gamma, cfg.noise["mode"], cfg.noise["C0"], cfg.noise["sigma_q2"],
                           cfg.noise["depth"])
        signals = noisy_signal(circuit, ref, n_points, delta, cfg.shots, model, cfg.seed,
                               cfg.configs, cfg.top_k, cfg.noise["noisy_prep"],
                               cfg.noise["budget"])
    else:
        if cfg.evolution["mode"] == "exact" and eig is not None:
            prop = ExactPropagator(eig, workers=cfg.workers)
        elif cfg.evolution["mode"] == "exact" and h is not None:
            raise ConfigError([f"exact mode is limited to {MAX_DIAG_QUBITS} qubits; "
                               "use trotter mode"])
        else:
            prop = CircuitPropagator(circuit)
        signals = measure_signal(prop, ref, n_points, delta, cfg.shots, cfg.seed,
                                 cfg.configs, cfg.top_k)
    timings["measure"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    a = cfg.analysis
    mult = float(a["threshold_multiplier"])
    floor = max(float(a["floor"]), 2 * float(a["weight_floor"]))
    sigma_bound = noise_sigma_bound(n_points, cfg.shots)
    spectra, peaks, sigmas, oracle_peaks = {}, {}, {}, None
    if eig is not None:
        oracle_peaks = {c: reference_peaks(eig, ref, c, a["weight_floor"]) for c in signals}
    for c, series in signals.items():
        spec = dft_real_even(series, delta)
        sigma = empirical_sigma(spec) if a["sigma_mode"] == "empirical" else sigma_bound
        spectra[c] = spec
        sigmas[c] = sigma
        peaks[c] = detect_peaks(spec, sigma, mult, floor)
    timings["analysis"] = time.perf_counter() - t0

    out = Path(out_dir if out_dir is not None else cfg.output)
    manifest = {
        "config": cfg.to_dict(), "seed": cfg.seed, "version": __version__,
        "reference": ref, "N": n_points, "delta": delta, "M": cfg.shots,
        "ideal": cfg.ideal, "workers": cfg.workers, "timings": timings, "files": {},
    }
    art = RunArtifacts(out, signals, spectra, peaks, sigmas, oracle_peaks, manifest)
    if write:
        _write_outputs(art, cfg, eig, circuit, mult, sigma_bound)
    return art


def _write_outputs(art: RunArtifacts, cfg, eig, circuit, mult, sigma_bound):
    t0 = time.perf_counter()
    out = art.out_dir
    out.mkdir(parents=True, exist_ok=True)
    files = []
    n_points = art.manifest["N"]
    delta = art.manifest["delta"]
    for c, series in art.signals.items():
        files += mio.write_signal(out / f"signal_{c}.csv", series)
        files.append(mio.write_spectrum(out / f"spectrum_{c}.csv", art.spectra[c]))
        files.append(mio.write_peaks(out / f"peaks_{c}.json", art.peaks[c], sigma_bound,
                                     mult, n_points, delta, cfg.shots, config=c,
                                     sigma_used=art.sigma[c]))
    if eig is not None:
        files.append(mio.write_oracle(out / "oracle.json", eig.energies, art.oracle_peaks,
                                      art.manifest["config"],
                                      reference=art.manifest["reference"]))
    if circuit is not None:
        files.append(mio.write_circuit(out / "circuit.json", circuit))
    art.manifest["timings"]["write"] = time.perf_counter() - t0
    art.manifest["files"] = {p.name: mio.sha256(p) for p in files}
    art.files = {p.name: p for p in files}
    mio.write_json(out / "manifest.json", art.manifest)


def summarize(art: RunArtifacts) -> list[dict]:
    """Per-config noise-floor RMS, peak count and dominant-peak magnitude."""
    rows = []
    n_points, delta = art.manifest["N"], art.manifest["delta"]
    for c, spec in art.spectra.items():
        if art.oracle_peaks is not None:
            gaps = [g for g, w in art.oracle_peaks[c] if abs(w) > _ORACLE_WEIGHT]
        else:
            gaps = [p.gap for p in art.peaks[c]]
        mask = noise_only_mask(n_points, delta, gaps)
        mags = spec.magnitude[mask]
        rms = float(np.sqrt(np.mean(mags**2))) if mags.size else float("nan")
        dom = art.peaks[c][0].magnitude if art.peaks[c] else 0.0
        rows.append({"config": c, "noise_floor_rms": rms,
                     "noise_only_bins": int(mask.sum()),
                     "peak_count": len(art.peaks[c]), "dominant_magnitude": dom,
                     "dominant_bin": art.peaks[c][0].bin if art.peaks[c] else -1})
    return rows


def _with_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    raw = copy.deepcopy(cfg.to_dict())
    if axis == "shots":
        raw["shots"] = int(value)
    elif axis == "gamma":
        raw["noise"]["gamma"] = float(value)
    else:
        raw["grid"]["delta"] = float(value)
    return ExperimentConfig.from_dict(raw)


def run_sweep(cfg: ExperimentConfig, axis: str, values, out_dir=None, write: bool = True):
    """One run per value (same seed), plus ``summary.csv`` in the sweep directory."""
    if axis not in SWEEP_AXES:
        raise ConfigError([f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}"])
    values = list(values)
    if not values:
        raise ConfigError(["sweep needs at least one value"])
    out = Path(out_dir if out_dir is not None else cfg.output)
    runs, summary = [], []
    for v in values:
        sub = _with_axis(cfg, axis, v)
        art = run_experiment(sub, out / f"{axis}_{_slug(v)}", write=write)
        runs.append(art)
        for row in summarize(art):
            summary.append({axis: v, **row})
    if write:
        out.mkdir(parents=True, exist_ok=True)
        cols = [axis, "config", "noise_floor_rms", "noise_only_bins", "peak_count",
                "dominant_magnitude", "dominant_bin"]
        lines = [",".join(cols)]
        for row in summary:
            lines.append(",".join(
                mio.fmt(row[k]) if isinstance(row[k], float) else str(row[k]) for k in cols))
        (out / "summary.csv").write_text("\n".join(lines) + "\n")
    return runs, summary


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
