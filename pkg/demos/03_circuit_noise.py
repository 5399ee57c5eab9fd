"""Pauli-channel noise on a seeded random step circuit.

The dominant peak keeps its position while its height shrinks roughly as
(1 - gamma)**N_G. The analytic model reproduces an exact whole-register
depolarizing simulation, and the budget law says how many shots a given
depth needs.
"""

# %%
import numpy as np

import mqte
from mqte.noise import NoiseModel, density_matrix_series, noisy_signal

delta, n_points, shots = 0.5, 1000, 400
circ = mqte.generate_random_step(4, depth=1, seed=7, delta=delta)
print("gates per step:", circ.gate_count_per_step)

# %% trajectory-independent runs at a few noise strengths
sigma = mqte.noise_sigma_bound(n_points, shots)
for gamma in (0.0, 0.02, 0.05, 0.1):
    model = NoiseModel(gamma, "independent", depth="constant")
    s = noisy_signal(circ, "0101", n_points, delta, shots, model, seed=11, configs=["0101"])
    peaks = mqte.detect_peaks(mqte.dft_real_even(s["0101"], delta), sigma)
    top = peaks[0]
    f = mqte.survival_probability(gamma, circ.gate_count_per_step)
    print(f"gamma={gamma:.2f}  f={f:.3f}  bin {top.bin}  |2F| {top.magnitude:.4f}")

# %% analytic mode against the depolarizing density-matrix reference
model = NoiseModel(0.05, "analytic", depth="constant")
s = noisy_signal(circ, "0101", 50, delta, 0, model, configs=["0101"])
dm = density_matrix_series(circ, "0101", 0.05, 50, delta, depth="constant",
                           channel="depolarizing")
print("max difference:", np.abs(s["0101"].values - dm[:, 5]).max())

# %% how deep can a circuit be with 10^4 shots?
for gamma in (1e-2, 1e-3, 1e-4):
    print(f"gamma={gamma:g}: N_G up to {mqte.max_circuit_depth(gamma, 10**4)}")
