"""CSV and JSON persistence for signals, spectra, peaks, oracles and circuits.

Floating-point values are written with 12 significant digits so that files
round-trip and compare byte for byte between identical runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .sampling import SignalSeries
from .spectral import Peak, Spectrum

FLOAT_FMT = "{:.12g}"


def fmt(x) -> str:
    return FLOAT_FMT.format(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if z.imag == 0:
            return _jsonable(z.real)
        return {"re": _jsonable(z.real), "im": _jsonable(z.imag)}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return str(x)
        return float(fmt(x))
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_signal(path, series: SignalSeries) -> tuple[Path, Path]:
    """Signal CSV (``n,t,p``) plus a ``.json`` metadata sidecar."""
    path = Path(path)
    lines = ["n,t,p"]
    for n, (t, p) in enumerate(zip(series.times, series.values)):
        lines.append(f"{n},{fmt(t)},{fmt(p)}")
    path.write_text("\n".join(lines) + "\n")
    side = write_json(path.with_suffix(".json"), series.metadata())
    return path, side


def read_signal(path, delta: float | None = None) -> SignalSeries:
    """Load a signal CSV; metadata come from the sidecar when it exists.

    Without a sidecar, delta is taken from the ``t`` column (or ``delta``).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"n", "p"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected a header with columns n and p")
        rows = [(int(r["n"]), float(r["p"]), float(r["t"]) if r.get("t") else None)
                for r in reader]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    rows.sort()
    ns = [r[0] for r in rows]
    if ns != list(range(len(rows))):
        raise ValueError(f"{path}: rows must cover n = 0..N without gaps")
    values = np.array([r[1] for r in rows])
    meta = {}
    side = path.with_suffix(".json")
    if side.exists():
        meta = json.loads(side.read_text())
    if delta is None:
        delta = meta.get("delta")
    if delta is None and len(rows) > 1 and rows[1][2] is not None:
        delta = rows[1][2]
    if delta is None:
        raise ValueError(f"{path}: cannot infer the sampling interval")
    extra = {k: v for k, v in meta.items()
             if k not in ("ref", "config", "delta", "N", "M", "seed")}
    return SignalSeries(meta.get("config", ""), meta.get("ref", ""), float(delta),
                        len(values) - 1, values, int(meta.get("M", 0)),
                        int(meta.get("seed", 0)), extra)


def write_spectrum(path, spectrum: Spectrum) -> Path:
    path = Path(path)
    lines = ["k,x_k,gap,F_k"]
    for k, x, g, f in zip(spectrum.bins, spectrum.x, spectrum.gaps, spectrum.coeffs):
        lines.append(f"{k},{fmt(x)},{fmt(g)},{fmt(f)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_spectrum(path, delta: float) -> Spectrum:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Spectrum(data[:, 3].copy(), float(delta), len(data) - 1)


def write_peaks(path, peaks: list[Peak], sigma_bound: float, threshold_multiplier: float,
                n_points: int, delta: float, shots: int, **extra) -> Path:
    payload = {
        "peaks": [p.as_dict() for p in peaks],
        "sigma_bound": sigma_bound,
        "threshold_multiplier": threshold_multiplier,
        "N": n_points,
        "delta": delta,
        "M": shots,
        **extra,
    }
    return write_json(path, payload)


def write_oracle(path, energies, peaks, config: dict, **extra) -> Path:
    """``peaks`` is a list of (gap, weight) or a mapping config -> such a list."""
    def table(rows):
        return [{"gap": g, "weight": w} for g, w in rows]

    payload = {
        "energies": np.asarray(energies),
        "peaks": {c: table(r) for c, r in peaks.items()} if isinstance(peaks, dict)
        else table(peaks),
        "config": config,
        **extra,
    }
    return write_json(path, payload)


def write_circuit(path, circuit) -> Path:
    """Gate-list dump: random step circuits natively, Trotter circuits as
    (qubits, matrix) records."""
    path = Path(path)
    if hasattr(circuit, "to_json"):
        path.write_text(circuit.to_json() + "\n")
        return path
    gates = [{"name": g.name, "qubits": list(g.qubits),
              "matrix_re": g.matrix.real, "matrix_im": g.matrix.imag}
             for g in circuit.step_gates]
    return write_json(path, {"n_qubits": circuit.n_qubits, "tau": circuit.tau,
                             "gates": gates})
