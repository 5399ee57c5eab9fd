import numpy as np
import pytest

from mqte.circuits import generate_random_step
from mqte.evolution import build_trotter_circuit
from mqte.hamiltonian import build_heisenberg_1d
from mqte.noise import (
    BudgetExceeded,
    NoiseModel,
    analytic_variance,
    apply_pauli_channel,
    density_matrix_oracle,
    density_matrix_series,
    expected_analytic,
    gates_per_point,
    max_circuit_depth,
    noisy_signal,
    required_shot_budget,
    survival_probability,
)
from mqte.quantum import basis_state
from mqte.sampling import CircuitPropagator, _collect, measure_signal

ALL2 = ["00", "01", "10", "11"]


def _table(signals, configs):
    return np.array([signals[c].values for c in configs]).T


def test_channel_identity_at_zero(rng):
    s = basis_state(2, "01")
    for _ in range(20):
        assert np.array_equal(apply_pauli_channel(s, 1, 0.0, rng).amplitudes, s.amplitudes)


def test_channel_full_strength_average(rng):
    s = basis_state(1, "0")
    rho = np.zeros((2, 2), complex)
    trials = 30000
    for _ in range(trials):
        a = apply_pauli_channel(s, 0, 1.0, rng).amplitudes
        rho += np.outer(a, a.conj())
    rho /= trials
    assert np.allclose(np.diag(rho).real, [1 / 3, 2 / 3], atol=0.01)


def test_oracle_single_gate_full_strength():
    from mqte.quantum import Gate

    class OneGate:
        n_qubits = 1
        step_gates = (Gate((0,), np.eye(2, dtype=complex), "id"),)
        tau = 0.1

    p = density_matrix_oracle(OneGate, "0", 1.0, 1, 0.1)
    assert np.allclose(p, [1 / 3, 2 / 3], atol=1e-12)


def test_oracle_noiseless_matches_pure():
    c = generate_random_step(3, 1, seed=8, delta=0.5)
    clean = _collect(CircuitPropagator(c).distributions("010", 15, 0.5), 15, 8)
    for depth in ("linear", "constant"):
        dm = density_matrix_series(c, "010", 0.0, 15, 0.5, depth=depth)
        assert np.abs(dm - clean).max() < 1e-12


def test_oracle_trace_preserved():
    c = generate_random_step(3, 2, seed=1, delta=0.5)
    dm = density_matrix_series(c, "011", 0.3, 10, 0.5)
    assert np.abs(dm.sum(axis=1) - 1).max() < 1e-12


def test_oracle_size_cap():
    with pytest.raises(ValueError):
        density_matrix_series(generate_random_step(5, 1, seed=0), "00000", 0.1, 2, 0.5)


def test_budget_formulas():
    assert survival_probability(0.0, 1234) == 1.0
    assert survival_probability(0.01, 916) == pytest.approx(1.0042417008235167e-4)
    assert survival_probability(0.01, 100) == pytest.approx(0.3660323412732292)
    assert required_shot_budget(0.01, 100) == 3
    assert required_shot_budget(0.01, 916) <= 10**4 < required_shot_budget(0.01, 917)
    assert max_circuit_depth(0.01, 10**4) == 916
    with pytest.raises(ValueError):
        required_shot_budget(1.0, 10)


def test_gates_per_point():
    c = generate_random_step(4, 1, seed=0, delta=0.5)
    assert gates_per_point(c, 0.5, 7, "linear") == 7 * 21
    assert gates_per_point(c, 0.5, 7, "constant") == 21


def test_zero_gamma_equals_clean_sampling():
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    clean = measure_signal(CircuitPropagator(c), "01", 30, 0.5, shots=0, configs=ALL2)
    noisy = noisy_signal(c, "01", 30, 0.5, 0, NoiseModel(0.0, "analytic"), configs=ALL2)
    assert np.allclose(_table(noisy, ALL2), _table(clean, ALL2), atol=1e-15)


def test_analytic_expectation_formula():
    c = generate_random_step(4, 1, seed=2, delta=0.5)
    g = 0.03
    clean = measure_signal(CircuitPropagator(c), "0101", 20, 0.5, configs=["0101"])["0101"].values
    out = noisy_signal(c, "0101", 20, 0.5, 0, NoiseModel(g, "analytic"), configs=["0101"])
    f = (1 - g) ** (np.arange(21) * 21)
    assert np.allclose(out["0101"].values, f * clean + (1 - f) / 16, atol=1e-15)


def test_analytic_sampled_mean_converges():
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    model = NoiseModel(0.05, "analytic", depth="constant")
    expect = noisy_signal(c, "01", 10, 0.5, 0, model, configs=ALL2)
    runs = [noisy_signal(c, "01", 10, 0.5, 200, model, seed=s, configs=ALL2) for s in range(100)]
    mean = np.mean([_table(r, ALL2) for r in runs], axis=0)
    assert np.abs(mean - _table(expect, ALL2)).max() < 5 / np.sqrt(100 * 200)


def test_analytic_variance_bounded():
    p, m, sq = 0.3, 100, 0.25 * 0.75
    vals = [analytic_variance(p, f, m, sq) for f in np.linspace(0, 1, 101)]
    ends = [analytic_variance(p, 1.0, m, sq), analytic_variance(p, 0.0, m, sq)]
    assert max(vals) <= max(ends) + 1e-18
    assert expected_analytic(0.3, 0.0, 0.25) == 0.25


@pytest.mark.filterwarnings("ignore:sequential trajectories")
@pytest.mark.parametrize("mode,depth", [("independent", "constant"), ("independent", "linear"),
                                         ("sequential", "linear")])
def test_trajectories_match_density_matrix(mode, depth):
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    g, m, n_points = 0.05, 10000, 12
    out = noisy_signal(c, "01", n_points, 0.5, m, NoiseModel(g, mode, depth=depth), seed=4,
                       configs=ALL2)
    dm = density_matrix_series(c, "01", g, n_points, 0.5, depth=depth)
    sigma = np.sqrt(dm * (1 - dm) / m) + 1e-12
    assert np.all(np.abs(_table(out, ALL2) - dm) <= 4 * sigma)


def test_noisy_prep_changes_nothing_at_zero_gamma():
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    a = density_matrix_series(c, "11", 0.0, 5, 0.5, noisy_prep=True)
    b = density_matrix_series(c, "11", 0.0, 5, 0.5)
    assert np.allclose(a, b, atol=1e-12)


def test_budget_refusal():
    c = build_trotter_circuit(build_heisenberg_1d(4), 0.05)
    with pytest.raises(BudgetExceeded):
        noisy_signal(c, "0101", 5000, 0.1, 1000, NoiseModel(0.01, "independent"))


def test_sequential_warns():
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    with pytest.warns(UserWarning):
        noisy_signal(c, "01", 5, 0.5, 10, NoiseModel(0.01, "sequential"))


def test_schedule_independent_rows():
    # a shorter grid reproduces the leading time points exactly
    c = generate_random_step(2, 1, seed=3, delta=0.5)
    model = NoiseModel(0.05, "independent", depth="constant")
    a = noisy_signal(c, "01", 20, 0.5, 50, model, seed=9, configs=ALL2)
    b = noisy_signal(c, "01", 8, 0.5, 50, model, seed=9, configs=ALL2)
    assert np.array_equal(_table(a, ALL2)[:9], _table(b, ALL2))


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(1.5)
    with pytest.raises(ValueError):
        NoiseModel(0.1, mode="magic")
    assert NoiseModel(0.1).background(4) == 1 / 16
    assert NoiseModel(0.1).background_variance(1) == 0.25
