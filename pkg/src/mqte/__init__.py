"""Measured quantum time evolution: simulate time-resolved measurement
probabilities and recover energy gaps from their Fourier spectrum."""

__version__ = "0.1.0"

from .circuits import RandomStepCircuit, effective_eigensystem, generate_random_step
from .evolution import build_trotter_circuit, evolve_exact, evolve_trotter, gate_count
from .hamiltonian import (
    Hamiltonian,
    build_heisenberg_1d,
    build_heisenberg_2d,
    custom_hamiltonian,
    neel_state,
)
from .noise import (
    NoiseModel,
    density_matrix_oracle,
    max_circuit_depth,
    noisy_signal,
    required_shot_budget,
    survival_probability,
)
from .oracle import diagonalize, predicted_signal, reference_peaks
from .quantum import PauliString, QuantumState, basis_state, inner_product, probabilities
from .sampling import ExactPropagator, CircuitPropagator, SignalSeries, measure_signal
from .spectral import (
    Spectrum,
    detect_peaks,
    dft_real_even,
    gap_from_bin,
    noise_sigma_bound,
    plan_sampling,
)
