"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the log)
or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from mqte.circuits import generate_random_step
from mqte.evolution import build_trotter_circuit, evolve_exact, evolve_trotter
from mqte.hamiltonian import build_heisenberg_1d
from mqte.noise import (
    NoiseModel,
    density_matrix_series,
    expected_analytic,
    max_circuit_depth,
    noisy_signal,
    required_shot_budget,
    survival_probability,
)
from mqte.oracle import diagonalize, predicted_signal
from mqte.quantum import basis_state
from mqte.runner import ExperimentConfig, noise_only_mask, run_experiment, run_sweep
from mqte.sampling import CircuitPropagator, ExactPropagator, _collect, measure_signal
from mqte.spectral import (
    bin_from_gap,
    bin_width,
    detect_peaks,
    dft_real_even,
    fold_gap,
    noise_sigma_bound,
)

RESULTS: dict[int, str] = {}


def report(num: int, ok: bool, detail: str, seconds: float) -> None:
    line = f"CRITERION {num:2d}: {'PASS' if ok else 'FAIL'}  ({seconds:.1f} s)  {detail}"
    RESULTS[num] = line
    print(line)


def _config(**raw) -> ExperimentConfig:
    return ExperimentConfig.from_dict(raw)


# -- 1 ---------------------------------------------------------------------------

def test_criterion_01_two_site_end_to_end():
    t0 = time.perf_counter()
    cfg = _config(model={"kind": "heisenberg1d", "sites": 2, "J": 1.0, "h": 2.0},
                  reference="01", evolution={"mode": "exact"},
                  grid={"delta": 0.1, "N": 2000}, shots=0, configs=["01"])
    art = run_experiment(cfg, write=False)
    peaks = art.peaks["01"]
    dt = time.perf_counter() - t0
    width = bin_width(2000, 0.1)
    one = len(peaks) == 1
    gap_ok = one and abs(peaks[0].gap - 4.0) <= width
    mag_ok = one and abs(peaks[0].magnitude - 0.5) <= 0.05 * 0.5
    ok = one and gap_ok and mag_ok and dt < 1.0
    detail = (f"peaks={len(peaks)} gap={peaks[0].gap:.5f} (|d|<={width:.5f}: {gap_ok}) "
              f"magnitude={peaks[0].magnitude:.4f} (0.5 +-5%: {mag_ok})") if peaks else "no peak"
    report(1, ok, detail, dt)
    assert ok, detail


# -- 2 ---------------------------------------------------------------------------

def test_criterion_02_oracle_equivalence():
    t0 = time.perf_counter()
    h = build_heisenberg_1d(6, 1.0, 2.0)
    eig = diagonalize(h)
    ref = "010101"
    configs = ["010101", "101010", "011001", "100110"]
    measured = measure_signal(ExactPropagator(eig), ref, 2000, 0.1, configs=configs)
    worst = max(np.abs(measured[c].values - predicted_signal(eig, c, ref, 2000, 0.1)).max()
                for c in configs)
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 10
    report(2, ok, f"max |measured - predicted| = {worst:.2e} over 4 configs x 2001 points", dt)
    assert ok


# -- 3 ---------------------------------------------------------------------------

def _alignment(model, delta, n_points):
    cfg = _config(model=model, reference="neel", grid={"delta": delta, "N": n_points},
                  shots=0, top_k=1, analysis={"weight_floor": 0.002})
    art = run_experiment(cfg, write=False)
    c = next(iter(art.peaks))
    gaps = np.array([g for g, _ in art.oracle_peaks[c]])
    pos = bin_from_gap(gaps, n_points, delta)
    det = np.array([p.bin for p in art.peaks[c]])
    aligned = sum(np.min(np.abs(pos - b)) <= 1 for b in det)
    found = sum(det.size > 0 and np.min(np.abs(det - p)) <= 1 for p in pos)
    return len(det), aligned, len(pos), found


def test_criterion_03_peak_alignment_large_scale():
    t0 = time.perf_counter()
    chain = _alignment({"kind": "heisenberg1d", "sites": 10, "J": 1.0, "h": 2.0}, 0.1, 20000)
    grid = _alignment({"kind": "heisenberg2d", "rows": 3, "cols": 3, "J": 1.0, "h": 2.0},
                      0.08, 25000)
    dt = time.perf_counter() - t0
    parts = []
    ok = dt < 600
    for name, (n_det, aligned, n_gap, found) in (("chain", chain), ("grid", grid)):
        ok &= aligned == n_det and found == n_gap
        parts.append(f"{name}: aligned {aligned}/{n_det} detected, found {found}/{n_gap} gaps")
    detail = "; ".join(parts)
    report(3, ok, detail, dt)
    assert ok, detail


# -- 4 ---------------------------------------------------------------------------

def test_criterion_04_trotter_order():
    t0 = time.perf_counter()
    h = build_heisenberg_1d(6, 1.0, 2.0)
    eig = diagonalize(h)
    s = basis_state(6, "010101")
    exact = evolve_exact(s, eig, 1.0).amplitudes
    errs = []
    for tau in (0.01, 0.005):
        out = evolve_trotter(s, build_trotter_circuit(h, tau), int(round(1 / tau)))
        errs.append(float(np.linalg.norm(out.amplitudes - exact)))
    ratio = errs[0] / errs[1]
    dt = time.perf_counter() - t0
    ok = 2.8 <= ratio <= 5.6 and dt < 30
    report(4, ok, f"errors {errs[0]:.3e} / {errs[1]:.3e}, ratio {ratio:.3f}", dt)
    assert ok


# -- 5 and 10 ----------------------------------------------------------------------

SWEEP_SHOTS = [10, 40, 160]


def _noise_sweep_config(workers=1, seed=2024):
    return _config(model={"kind": "heisenberg1d", "sites": 6, "J": 1.0, "h": 2.0},
                   reference="neel", evolution={"mode": "exact"},
                   grid={"delta": 0.1, "N": 2000}, shots=10, seed=seed, workers=workers,
                   configs=["010101", "011001", "100101", "011010"])


def test_criterion_05_sampling_noise_law(tmp_path):
    t0 = time.perf_counter()
    runs, summary = run_sweep(_noise_sweep_config(), "shots", SWEEP_SHOTS, tmp_path)
    n_points = 2000
    rms = {}
    tails = []
    bound_ok = True
    worst_bound = 0.0
    for art, m in zip(runs, SWEEP_SHOTS):
        for c, spec in art.spectra.items():
            gaps = [g for g, w in art.oracle_peaks[c] if abs(w) > 1e-6]
            mask = noise_only_mask(n_points, 0.1, gaps)
            mags = spec.magnitude[mask]
            r = float(np.sqrt(np.mean(mags**2)))
            rms[c, m] = r
            limit = 2 / math.sqrt(2 * n_points * m)
            worst_bound = max(worst_bound, r / limit)
            bound_ok &= r <= 1.1 * limit
            # 2 sigma-hat estimated by the noise-only RMS of |2F|
            tails.append((int(np.sum(mags > 3 * r)), mags.size))
    ratios = [rms[c, a] / rms[c, b] for c in runs[0].spectra
              for a, b in zip(SWEEP_SHOTS, SWEEP_SHOTS[1:])]
    ratio_ok = all(1.5 <= x <= 2.5 for x in ratios)
    # fraction over all noise-only bins of the sweep
    tail = sum(a for a, _ in tails) / sum(b for _, b in tails)
    worst_series = max(a / b for a, b in tails)
    dt = time.perf_counter() - t0
    ok = ratio_ok and bound_ok and tail <= 0.01 and dt < 300
    detail = (f"RMS ratios per 4x shots {min(ratios):.3f}..{max(ratios):.3f} (need 1.5..2.5); "
              f"max RMS / (2/sqrt(2NM)) = {worst_bound:.3f}; tail fraction {tail:.4f} "
              f"(worst single series {worst_series:.4f})")
    report(5, ok, detail, dt)
    assert ok, detail


# -- 6 ---------------------------------------------------------------------------

class _Constant:
    """Stand-in propagator whose state always gives p = 1/2 on one qubit."""

    n_qubits = 1

    def distributions(self, ref, n_points, delta, columns=None):
        block = np.full((n_points + 1, 2), 0.5)
        yield 0, block if columns is None else block[:, columns]


def test_criterion_06_false_alarm_rate():
    t0 = time.perf_counter()
    n_points, m = 20000, 100
    sigma = noise_sigma_bound(n_points, m)
    counts = []
    for seed in range(20):
        s = measure_signal(_Constant(), "0", n_points, 0.1, shots=m, seed=seed, configs=["0"])
        counts.append(len(detect_peaks(dft_real_even(s["0"], 0.1), sigma, 4.0)))
    mean = float(np.mean(counts))
    dt = time.perf_counter() - t0
    ok = mean <= 2 and dt < 300
    report(6, ok, f"mean false peaks per run {mean:.2f} (ideal ~1.3), counts {counts}", dt)
    assert ok


# -- 7 ---------------------------------------------------------------------------

def test_criterion_07_circuit_noise():
    t0 = time.perf_counter()
    n_points, m, delta = 1000, 400, 0.5
    circ = generate_random_step(4, 1, seed=7, delta=delta)
    ref = "0101"
    sigma = noise_sigma_bound(n_points, m)
    dominant = {}
    for g in (0.0, 0.02, 0.05):
        model = NoiseModel(g, "independent", depth="constant")
        s = noisy_signal(circ, ref, n_points, delta, m, model, seed=11, configs=[ref])[ref]
        peaks = detect_peaks(dft_real_even(s, delta), sigma, 4.0)
        dominant[g] = peaks[0].bin if peaks else None
    inv_ok = dominant[0.0] is not None and dominant[0.02] == dominant[0.0] == dominant[0.05]

    small = generate_random_step(2, 1, seed=3, delta=delta)
    cfgs = ["00", "01", "10", "11"]
    fractions = []
    for g in (0.02, 0.05):
        model = NoiseModel(g, "independent", depth="constant")
        s = noisy_signal(small, "01", n_points, delta, m, model, seed=5, configs=cfgs)
        tab = np.array([s[c].values for c in cfgs]).T
        dm = density_matrix_series(small, "01", g, n_points, delta, depth="constant")
        fractions.append(float(np.mean(np.abs(tab - dm) <= 3 * np.sqrt(dm * (1 - dm) / m))))
    mc_ok = min(fractions) >= 0.99

    clean = _collect(CircuitPropagator(circ).distributions(ref, n_points, delta), n_points, 16)
    formula_err, oracle_err = 0.0, 0.0
    for g in (0.02, 0.05):
        model = NoiseModel(g, "analytic", depth="constant")
        s = noisy_signal(circ, ref, n_points, delta, 0, model, configs=["0000", ref, "1111"])
        tab = np.array([s[c].values for c in ("0000", ref, "1111")]).T
        f = survival_probability(g, circ.gate_count_per_step)
        cols = [0, 5, 15]
        formula_err = max(formula_err, np.abs(tab - expected_analytic(clean[:, cols], f, 1 / 16)).max())
        dm = density_matrix_series(circ, ref, g, n_points, delta, depth="constant",
                                   channel="depolarizing")
        oracle_err = max(oracle_err, np.abs(tab - dm[:, cols]).max())
    analytic_ok = formula_err < 1e-12 and oracle_err < 1e-9
    dt = time.perf_counter() - t0
    ok = inv_ok and mc_ok and analytic_ok and dt < 900
    detail = (f"dominant bins {dominant}; 2-qubit within-3sigma fractions "
              f"{[round(x, 4) for x in fractions]}; analytic vs formula {formula_err:.1e}, "
              f"vs oracle {oracle_err:.1e}")
    report(7, ok, detail, dt)
    assert ok, detail


# -- 8 ---------------------------------------------------------------------------

def test_criterion_08_budget_formulas():
    t0 = time.perf_counter()
    targets = {1e-2: 916, 1e-3: 9206, 1e-4: 92099}
    got = {g: max_circuit_depth(g, 10**4) for g in targets}
    consistent = all(required_shot_budget(g, n) <= 10**4 < required_shot_budget(g, n + 1)
                     for g, n in got.items())
    dt = time.perf_counter() - t0
    ok = consistent and all(abs(got[g] - n) <= 1 for g, n in targets.items())
    report(8, ok, f"N_G at M=1e4: {got} (targets {targets}, +-1)", dt)
    assert ok


# -- 9 ---------------------------------------------------------------------------

def _spurious(delta):
    n_points = int(round(2000 / delta))
    cfg = _config(model={"kind": "heisenberg1d", "sites": 10, "J": 1.0, "h": 2.0},
                  reference="neel", grid={"delta": delta, "N": n_points}, shots=0, top_k=1,
                  analysis={"weight_floor": 0.002})
    art = run_experiment(cfg, write=False)
    c = next(iter(art.peaks))
    gaps = np.array([g for g, _ in art.oracle_peaks[c]])
    pos = bin_from_gap(gaps, n_points, delta)
    folded = bin_from_gap(fold_gap(gaps, delta), n_points, delta)
    return [round(p.gap, 3) for p in art.peaks[c]
            if np.min(np.abs(pos - p.bin)) > 3 and np.min(np.abs(folded - p.bin)) <= 1]


def test_criterion_09_aliasing():
    t0 = time.perf_counter()
    coarse = _spurious(0.25)
    fine = _spurious(0.1)
    dt = time.perf_counter() - t0
    ok = len(coarse) >= 1 and not fine and dt < 600
    report(9, ok, f"folded-image peaks at delta=0.25: {coarse}; at delta=0.1: {fine}", dt)
    assert ok


# -- 10 --------------------------------------------------------------------------

def _csv_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*.csv"))}


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    run_sweep(_noise_sweep_config(workers=1), "shots", SWEEP_SHOTS, tmp_path / "a")
    run_sweep(_noise_sweep_config(workers=1), "shots", SWEEP_SHOTS, tmp_path / "b")
    run_sweep(_noise_sweep_config(workers=4), "shots", SWEEP_SHOTS, tmp_path / "c")
    a, b, c = (_csv_bytes(tmp_path / x) for x in "abc")
    dt = time.perf_counter() - t0
    ok = len(a) > 0 and a == b == c
    report(10, ok, f"{len(a)} CSV files identical across reruns and worker counts: {ok}", dt)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
