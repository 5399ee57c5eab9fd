"""Pauli-channel circuit noise.

Three ways to produce noisy signals are offered:

* ``independent``: every (time point, shot) pair is a fresh Monte Carlo
  trajectory from t = 0, each gate followed by a Pauli channel on the
  qubits it touches. Faithful to independent hardware runs; cost grows as
  N**2 for repeated-step circuits.
* ``sequential``: one trajectory per shot carried across the whole time
  grid. Cheap, but the noise is correlated between time points.
* ``analytic``: the clean distribution is mixed with a uniform background,
  f p + (1 - f) C0 with f = (1 - gamma)**N_G, and then sampled.

``density_matrix_series`` is an exact mixed-state reference for registers
of at most four qubits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quantum import QuantumState, apply_matrix, bits_to_index, index_to_bits
from .sampling import (
    NOISE_STREAM,
    OUTCOME_STREAM,
    SHOTS_STREAM,
    CircuitPropagator,
    SignalSeries,
    _normalized,
    select_configs,
    stream_rng,
)

MODES = ("independent", "sequential", "analytic")
DEPTHS = ("linear", "constant")
DEFAULT_BUDGET = 2e10  # amplitude updates allowed in independent mode
MAX_ORACLE_QUBITS = 4

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0 + 0j, -1.0])


class BudgetExceeded(RuntimeError):
    def __init__(self, estimate: float, budget: float):
        self.estimate = estimate
        self.budget = budget
        super().__init__(
            f"independent trajectories need ~{estimate:.3g} amplitude updates "
            f"(budget {budget:.3g}); use mode 'sequential' or 'analytic', or "
            f"raise the budget"
        )


@dataclass(frozen=True)
class NoiseModel:
    gamma: float
    mode: str = "sequential"
    c0: float | None = None  # background probability, default 1/2**n
    sigma_q2: float | None = None  # background variance, default C0 (1 - C0)
    depth: str = "linear"  # how N_G grows with the time index

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"noise mode must be one of {MODES}")
        if self.depth not in DEPTHS:
            raise ValueError(f"depth must be one of {DEPTHS}")
        if self.c0 is not None and not 0.0 <= self.c0 <= 1.0:
            raise ValueError("C0 must lie in [0, 1]")

    def background(self, n_qubits: int) -> float:
        return 1.0 / 2**n_qubits if self.c0 is None else self.c0

    def background_variance(self, n_qubits: int) -> float:
        c0 = self.background(n_qubits)
        return c0 * (1 - c0) if self.sigma_q2 is None else self.sigma_q2


def survival_probability(gamma: float, n_gates: int) -> float:
    """Probability that none of ``n_gates`` gates suffers an error."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return (1.0 - gamma) ** n_gates


def required_shot_budget(gamma: float, n_gates: int) -> int:
    """Order-of-magnitude shots needed to keep peaks above the noise floor."""
    if gamma >= 1.0:
        raise ValueError("no shot budget suffices when every gate fails")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return math.ceil(math.exp(-n_gates * math.log1p(-gamma)) * (1 - 1e-12))


def max_circuit_depth(gamma: float, shots: int) -> int:
    """Largest N_G whose required shot budget stays within ``shots``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return int(math.floor(math.log(shots) / -math.log1p(-gamma)))


def expected_analytic(p, f, c0: float):
    """Mean of the analytic-mode estimator: f p + (1 - f) C0."""
    return np.asarray(f) * np.asarray(p) + (1 - np.asarray(f)) * c0


def analytic_variance(p, f, shots: int, sigma_q2: float):
    """(f^2 p(1-p) + (1-f)^2 sigma_q^2) / M."""
    p = np.asarray(p)
    f = np.asarray(f)
    return (f**2 * p * (1 - p) + (1 - f) ** 2 * sigma_q2) / shots


# --- Pauli errors on raw amplitudes -------------------------------------------

def _qubit_tables(q: int, n_qubits: int):
    idx = np.arange(2**n_qubits)
    bit = 1 << (n_qubits - 1 - q)
    return idx ^ bit, 1.0 - 2.0 * ((idx & bit) != 0)


def _apply_errors(psi: np.ndarray, qubits, u: np.ndarray, gamma: float, n_qubits: int):
    """Pauli channel on each qubit in ``qubits`` for every row of ``psi``.

    ``u`` holds one uniform per (row, qubit): u < gamma/3 -> X,
    < 2gamma/3 -> Y, < gamma -> Z, otherwise identity.
    """
    if gamma == 0:
        return psi
    for col, q in enumerate(qubits):
        uc = u[:, col]
        hit = np.flatnonzero(uc < gamma)
        if hit.size == 0:
            continue
        kind = np.minimum((uc[hit] * 3 / gamma).astype(int), 2)
        flip, zsign = _qubit_tables(q, n_qubits)
        for letter in range(3):
            rows = hit[kind == letter]
            if rows.size == 0:
                continue
            block = psi[rows]
            if letter == 0:
                psi[rows] = block[:, flip]
            elif letter == 1:
                psi[rows] = 1j * (block * zsign)[:, flip]
            else:
                psi[rows] = block * zsign
    return psi


def apply_pauli_channel(state: QuantumState, qubit: int, gamma: float,
                        rng: np.random.Generator) -> QuantumState:
    """One trajectory of the channel: X, Y or Z each with probability gamma/3."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    psi = state.amplitudes.copy()[None, :]
    u = np.array([[rng.random()]])
    psi = _apply_errors(psi, (qubit,), u, gamma, state.n_qubits)
    return QuantumState(state.n_qubits, psi[0])


# --- gate programs -------------------------------------------------------------

def _prep_gates(ref: str):
    from .quantum import Gate

    return [Gate((q,), _X, "x") for q, b in enumerate(ref) if b == "1"]


def _interval_gates(circuit, delta: float):
    steps = CircuitPropagator(circuit).steps_for(delta)
    return list(circuit.step_gates) * steps


def _constant_program(circuit):
    if not hasattr(circuit, "program"):
        raise ValueError("constant-depth noise needs a circuit with a closed-form "
                         "program for every time (a random step circuit)")
    return circuit.program(1)


def gates_per_point(circuit, delta: float, n: int, depth: str) -> int:
    """N_G for the circuit that reaches time n * delta."""
    if depth == "constant":
        return len(_constant_program(circuit))
    return n * len(_interval_gates(circuit, delta))


def _start_rows(rows: int, ref: str, n_qubits: int, prep) -> tuple[np.ndarray, list]:
    psi = np.zeros((rows, 2**n_qubits), dtype=complex)
    if prep:
        psi[:, 0] = 1.0
        return psi, _prep_gates(ref)
    psi[:, bits_to_index(ref)] = 1.0
    return psi, []


def _sample_outcomes(psi: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(np.abs(psi) ** 2, axis=1)
    cum /= cum[:, -1:]
    return np.minimum((cum < u[:, None]).sum(axis=1), psi.shape[1] - 1)


def _slots(gates) -> int:
    return sum(len(g.qubits) for g in gates)


def _run_noisy(psi, gates, u, gamma, n_qubits, col=0):
    for g in gates:
        psi = apply_matrix(psi, g.matrix, g.qubits, n_qubits)
        k = len(g.qubits)
        psi = _apply_errors(psi, g.qubits, u[:, col:col + k], gamma, n_qubits)
        col += k
    return psi, col


def _independent_constant(circuit, ref, n_points, shots, gamma, seed, prep, block=64):
    n_qubits = circuit.n_qubits
    dim = 2**n_qubits
    program = _constant_program(circuit)
    counts = np.zeros((n_points + 1, dim), dtype=np.int32)
    for start in range(0, n_points + 1, block):
        times = np.arange(start, min(start + block, n_points + 1))
        n_row = np.repeat(times, shots)
        psi, pre = _start_rows(len(n_row), ref, n_qubits, prep)
        total = _slots(pre) + sum(len(g.qubits) for g in program)
        u = np.concatenate([stream_rng(seed, NOISE_STREAM, n).random((shots, total))
                            for n in times])
        psi, col = _run_noisy(psi, pre, u, gamma, n_qubits)
        for g in program:
            if g.timed:
                signs = g.z_signs(n_qubits)
                psi = psi * np.exp(-0.5j * g.angle * np.outer(n_row, signs))
            else:
                psi = apply_matrix(psi, g.matrix(), g.qubits, n_qubits)
            k = len(g.qubits)
            psi = _apply_errors(psi, g.qubits, u[:, col:col + k], gamma, n_qubits)
            col += k
        uo = np.concatenate([stream_rng(seed, OUTCOME_STREAM, n).random(shots) for n in times])
        out = _sample_outcomes(psi, uo)
        for i, n in enumerate(times):
            counts[n] = np.bincount(out[i * shots:(i + 1) * shots], minlength=dim)
    return counts


def _independent_linear(circuit, ref, n_points, delta, shots, gamma, seed, prep):
    n_qubits = circuit.n_qubits
    dim = 2**n_qubits
    interval = _interval_gates(circuit, delta)
    slots = _slots(interval)
    # rows ordered by time index, latest first, so the active set is a prefix
    psi, pre = _start_rows((n_points + 1) * shots, ref, n_qubits, prep)
    gens = [stream_rng(seed, NOISE_STREAM, n) for n in range(n_points, -1, -1)]
    if pre:
        u = np.concatenate([g.random((shots, _slots(pre))) for g in gens])
        psi, _ = _run_noisy(psi, pre, u, gamma, n_qubits)
    for s in range(1, n_points + 1):
        active = (n_points - s + 1) * shots
        u = np.concatenate([g.random((shots, slots)) for g in gens[: n_points - s + 1]])
        psi[:active], _ = _run_noisy(psi[:active], interval, u, gamma, n_qubits)
    counts = np.zeros((n_points + 1, dim), dtype=np.int32)
    for pos, n in enumerate(range(n_points, -1, -1)):
        rows = psi[pos * shots:(pos + 1) * shots]
        out = _sample_outcomes(rows, stream_rng(seed, OUTCOME_STREAM, n).random(shots))
        counts[n] = np.bincount(out, minlength=dim)
    return counts


def _sequential(circuit, ref, n_points, delta, shots, gamma, seed, prep):
    n_qubits = circuit.n_qubits
    dim = 2**n_qubits
    interval = _interval_gates(circuit, delta)
    slots = _slots(interval)
    psi, pre = _start_rows(shots, ref, n_qubits, prep)
    if pre:
        u = stream_rng(seed, NOISE_STREAM, 0).random((shots, _slots(pre)))
        psi, _ = _run_noisy(psi, pre, u, gamma, n_qubits)
    counts = np.zeros((n_points + 1, dim), dtype=np.int32)
    for n in range(n_points + 1):
        if n:
            u = stream_rng(seed, NOISE_STREAM, n).random((shots, slots))
            psi, _ = _run_noisy(psi, interval, u, gamma, n_qubits)
        out = _sample_outcomes(psi, stream_rng(seed, OUTCOME_STREAM, n).random(shots))
        counts[n] = np.bincount(out, minlength=dim)
    return counts


def _analytic(circuit, ref, n_points, delta, shots, model, seed):
    n_qubits = circuit.n_qubits
    dim = 2**n_qubits
    c0 = model.background(n_qubits)
    uniform = abs(c0 - 1.0 / dim) < 1e-15
    table = np.empty((n_points + 1, dim))
    for start, block in CircuitPropagator(circuit).distributions(ref, n_points, delta):
        for row, p in enumerate(block):
            n = start + row
            f = survival_probability(model.gamma, gates_per_point(circuit, delta, n, model.depth))
            q = expected_analytic(p, f, c0)
            if shots == 0:
                table[n] = q
            elif uniform:
                rng = stream_rng(seed, SHOTS_STREAM, n)
                table[n] = rng.multinomial(shots, _normalized(q)) / shots
            else:
                rng = stream_rng(seed, SHOTS_STREAM, n)
                table[n] = rng.binomial(shots, np.clip(q, 0.0, 1.0)) / shots
    return table


def trajectory_cost(circuit, n_points: int, delta: float, shots: int, depth: str) -> float:
    """Amplitude updates needed by independent-mode trajectories."""
    dim = 2**circuit.n_qubits
    if depth == "constant":
        return float(shots) * (n_points + 1) * len(_constant_program(circuit)) * dim
    per = len(_interval_gates(circuit, delta))
    return float(shots) * per * n_points * (n_points + 1) / 2 * dim


def noisy_signal(circuit, ref: str, n_points: int, delta: float, shots: int,
                 model: NoiseModel, seed: int = 0, configs=None, top_k=8,
                 noisy_prep: bool = False, budget: float = DEFAULT_BUDGET
                 ) -> dict[str, SignalSeries]:
    """Noisy counterpart of :func:`mqte.sampling.measure_signal` for a circuit.

    ``circuit`` is a Trotter circuit or a random step circuit. Reference
    preparation is noiseless unless ``noisy_prep`` is set.
    """
    n_qubits = circuit.n_qubits
    if len(ref) != n_qubits:
        raise ValueError(f"reference {ref!r} does not match {n_qubits} qubits")
    if shots < 0 or (shots == 0 and model.mode != "analytic"):
        raise ValueError("trajectory modes need a positive shot count")
    CircuitPropagator(circuit).steps_for(delta)

    if model.mode == "analytic":
        table = _analytic(circuit, ref, n_points, delta, shots, model, seed)
        observed = table.max(axis=0) > 0
    else:
        if model.mode == "independent":
            cost = trajectory_cost(circuit, n_points, delta, shots, model.depth)
            if cost > budget:
                raise BudgetExceeded(cost, budget)
            if model.depth == "constant":
                counts = _independent_constant(circuit, ref, n_points, shots,
                                               model.gamma, seed, noisy_prep)
            else:
                counts = _independent_linear(circuit, ref, n_points, delta, shots,
                                             model.gamma, seed, noisy_prep)
        else:
            if model.gamma > 0:
                warnings.warn("sequential trajectories correlate noise across time points",
                              stacklevel=2)
            counts = _sequential(circuit, ref, n_points, delta, shots, model.gamma,
                                 seed, noisy_prep)
        table = counts / shots
        observed = counts.max(axis=0) > 0

    if configs is not None:
        chosen = np.array([bits_to_index(c) for c in configs])
    else:
        chosen = select_configs(table.mean(axis=0), top_k, observed=observed)
    meta = {"gamma": model.gamma, "mode": model.mode, "C0": model.background(n_qubits),
            "depth": model.depth}
    return {
        index_to_bits(int(i), n_qubits): SignalSeries(
            index_to_bits(int(i), n_qubits), ref, float(delta), n_points,
            np.ascontiguousarray(table[:, i]), shots, seed, dict(meta))
        for i in chosen
    }


# --- density-matrix reference --------------------------------------------------

def _embed(matrix: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    return apply_matrix(np.eye(dim, dtype=complex), matrix, qubits, n_qubits).T


def _channel(rho, qubits, gamma, n_qubits, channel, paulis):
    if gamma == 0:
        return rho
    if channel == "depolarizing":
        dim = rho.shape[0]
        return (1 - gamma) * rho + gamma * np.trace(rho) * np.eye(dim) / dim
    for q in qubits:
        mixed = sum(p @ rho @ p.conj().T for p in paulis[q])
        rho = (1 - gamma) * rho + gamma / 3 * mixed
    return rho


def _dm_run(rho, gates, gamma, n_qubits, channel, paulis):
    for qubits, u in gates:
        rho = u @ rho @ u.conj().T
        rho = _channel(rho, qubits, gamma, n_qubits, channel, paulis)
    return rho


def density_matrix_series(circuit, ref: str, gamma: float, n_points: int, delta: float,
                          depth: str = "linear", channel: str = "pauli",
                          noisy_prep: bool = False, only: int | None = None) -> np.ndarray:
    """Exact outcome distributions diag(rho_n) for n = 0..N.

    With ``only`` set (constant depth), just that time index is returned.
    ``channel="pauli"`` applies the single-qubit Pauli channel after every
    gate on each touched qubit. ``channel="depolarizing"`` applies the
    whole-register map rho -> (1-gamma) rho + gamma I/d once per gate, the
    uniform-collapse picture behind the analytic mode.
    """
    n_qubits = circuit.n_qubits
    if n_qubits > MAX_ORACLE_QUBITS:
        raise ValueError(f"density-matrix oracle is limited to {MAX_ORACLE_QUBITS} qubits")
    if channel not in ("pauli", "depolarizing"):
        raise ValueError("channel must be 'pauli' or 'depolarizing'")
    dim = 2**n_qubits
    paulis = [[_embed(p, (q,), n_qubits) for p in (_X, _Y, _Z)] for q in range(n_qubits)]

    def embed_all(gates):
        return [(g.qubits, _embed(g.matrix, g.qubits, n_qubits)) for g in gates]

    rho0 = np.zeros((dim, dim), dtype=complex)
    pre = []
    if noisy_prep:
        rho0[0, 0] = 1.0
        pre = embed_all(_prep_gates(ref))
    else:
        idx = bits_to_index(ref)
        rho0[idx, idx] = 1.0
    rho0 = _dm_run(rho0, pre, gamma, n_qubits, channel, paulis)

    out = np.empty((n_points + 1, dim))
    if depth == "linear":
        interval = embed_all(_interval_gates(circuit, delta))
        rho = rho0
        for n in range(n_points + 1):
            if n:
                rho = _dm_run(rho, interval, gamma, n_qubits, channel, paulis)
            out[n] = rho.diagonal().real
        return out
    times = range(n_points + 1) if only is None else [only]
    out = out[: len(times)]
    for row, n in enumerate(times):
        program = [(g.qubits, _embed(g.matrix(n), g.qubits, n_qubits))
                   for g in _constant_program(circuit)]
        out[row] = _dm_run(rho0, program, gamma, n_qubits, channel, paulis).diagonal().real
    return out


def density_matrix_oracle(circuit, ref: str, gamma: float, n: int, delta: float,
                          depth: str = "linear", channel: str = "pauli",
                          noisy_prep: bool = False) -> np.ndarray:
    """Outcome distribution at time index ``n`` (see :func:`density_matrix_series`)."""
    if depth == "linear":
        return density_matrix_series(circuit, ref, gamma, n, delta, depth, channel,
                                     noisy_prep)[n]
    return density_matrix_series(circuit, ref, gamma, n, delta, depth, channel,
                                 noisy_prep, only=n)[0]
