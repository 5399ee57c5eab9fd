"""Ten-site chain from a Neel reference: gap recovery and aliasing.

With T = N delta = 2000 the DFT resolution is about 1.6e-3 in energy. At
delta = 0.1 every strong oracle gap is below the Nyquist limit pi / delta;
at delta = 0.25 the largest gaps fold back into the spectrum.
"""

# %%
import numpy as np

import mqte
from mqte.runner import ExperimentConfig, run_experiment
from mqte.spectral import bin_from_gap, fold_gap


def run(delta):
    cfg = ExperimentConfig.from_dict({
        "model": {"kind": "heisenberg1d", "sites": 10, "J": 1.0, "h": 2.0},
        "reference": "neel",
        "grid": {"delta": delta, "N": int(round(2000 / delta))},
        "analysis": {"weight_floor": 0.002},
        "top_k": 1,
    })
    return run_experiment(cfg, write=False)


# %% delta = 0.1
art = run(0.1)
ref = art.manifest["reference"]
gaps = np.array([g for g, _ in art.oracle_peaks[ref]])
print(f"{len(gaps)} oracle gaps above the 0.002 weight floor, largest {gaps.max():.3f}")
print(f"{len(art.peaks[ref])} detected peaks")
for p in art.peaks[ref][:8]:
    print(f"  gap {p.gap:8.4f}   2F {p.amplitude:+.4f}")

# %% delta = 0.25: peaks that only match a folded oracle gap
art = run(0.25)
n_points = art.manifest["N"]
pos = bin_from_gap(gaps, n_points, 0.25)
fold = bin_from_gap(fold_gap(gaps, 0.25), n_points, 0.25)
for p in art.peaks[ref]:
    if np.min(np.abs(pos - p.bin)) > 3 and np.min(np.abs(fold - p.bin)) <= 1:
        src = gaps[np.argmin(np.abs(fold - p.bin))]
        print(f"apparent gap {p.gap:.3f} is the image of {src:.3f}")

# %% the planner flags the same gaps up front
plan = mqte.plan_sampling(0.25, np.pi / 2000, max_gap=gaps)
print("N =", plan.n_points, "aliased:", plan.aliased)
print({round(k, 3): round(v, 3) for k, v in plan.folded.items()})
