"""Time evolution: exact spectral propagation and second-order Trotter circuits."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian
from .oracle import Eigensystem
from .quantum import PAULI_MATRICES, Gate, QuantumState, apply_matrix


def _local_matrix(terms, support) -> np.ndarray:
    """Sum of Pauli terms restricted to the qubits in ``support``."""
    k = len(support)
    pos = {q: i for i, q in enumerate(support)}
    out = np.zeros((2**k, 2**k), dtype=complex)
    for t in terms:
        letters = ["I"] * k
        for q in t.support:
            letters[pos[q]] = t.factors[q]
        m = np.array([[1.0 + 0j]])
        for f in letters:
            m = np.kron(m, PAULI_MATRICES[f])
        out += t.coefficient * m
    return out


def _exp_hermitian(h: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta h) for Hermitian h."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def _term_groups(h: Hamiltonian) -> list[list[tuple[int, ...]]]:
    """Split the term supports into layers of mutually disjoint supports."""
    by_support = defaultdict(list)
    for t in h.terms:
        by_support[t.support].append(t)
    geo = h.geometry
    if h.bonds and geo.kind in ("chain", "grid"):
        groups = defaultdict(list)
        for a, b, orient in h.bonds:
            if (a, b) not in by_support:
                continue
            r, c = divmod(a, geo.cols)
            parity = c % 2 if orient == "h" else r % 2
            groups[(orient, parity)].append((a, b))
        order = [("h", 0), ("h", 1), ("v", 0), ("v", 1)]
        return [groups[key] for key in order if groups[key]]
    # greedy layering for arbitrary supports
    layers: list[list[tuple[int, ...]]] = []
    used: list[set] = []
    for support in by_support:
        if not support:
            continue  # identity terms only shift the global phase
        for layer, qubits in zip(layers, used):
            if qubits.isdisjoint(support):
                layer.append(support)
                qubits.update(support)
                break
        else:
            layers.append([support])
            used.append(set(support))
    return layers


@dataclass(frozen=True)
class TrotterCircuit:
    n_qubits: int
    step_gates: tuple[Gate, ...]
    tau: float

    @property
    def gate_count_per_step(self) -> int:
        return len(self.step_gates)


def build_trotter_circuit(h: Hamiltonian, tau: float) -> TrotterCircuit:
    """Symmetric (Strang) splitting over disjoint term groups.

    With groups G1..Gm one step is G1(tau/2) ... G(m-1)(tau/2) Gm(tau)
    G(m-1)(tau/2) ... G1(tau/2); every support inside a group is exponentiated
    exactly as one gate.
    """
    if not tau > 0:
        raise ValueError("Trotter step must be positive")
    by_support = defaultdict(list)
    for t in h.terms:
        by_support[t.support].append(t)
    groups = _term_groups(h)

    def layer(group, theta):
        return [
            Gate(s, _exp_hermitian(_local_matrix(by_support[s], s), theta), "bond")
            for s in group
        ]

    gates: list[Gate] = []
    if groups:
        half = [layer(g, tau / 2) for g in groups[:-1]]
        for lay in half:
            gates.extend(lay)
        gates.extend(layer(groups[-1], tau))
        for lay in reversed(half):
            gates.extend(lay)
    return TrotterCircuit(h.n_qubits, tuple(gates), float(tau))


def run_gates(psi: np.ndarray, gates, n_qubits: int, repeats: int = 1) -> np.ndarray:
    for _ in range(repeats):
        for g in gates:
            psi = apply_matrix(psi, g.matrix, g.qubits, n_qubits)
    return psi


def evolve_trotter(state: QuantumState, circuit: TrotterCircuit, steps: int) -> QuantumState:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("circuit and state register sizes differ")
    psi = run_gates(state.amplitudes, circuit.step_gates, state.n_qubits, steps)
    return QuantumState(state.n_qubits, psi)


def evolve_exact(state: QuantumState, eig: Eigensystem, t: float) -> QuantumState:
    if eig.dim != state.dim:
        raise ValueError("eigensystem and state dimensions differ")
    v = eig.vectors
    c = v.conj().T @ state.amplitudes
    return QuantumState(state.n_qubits, v @ (np.exp(-1j * eig.energies * t) * c))


def gate_count(circuit, steps: int) -> int:
    return steps * circuit.gate_count_per_step


def steps_per_interval(delta: float, tau: float) -> int:
    """Number of Trotter steps in one sampling interval; delta must be a multiple of tau."""
    ratio = delta / tau
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"sampling interval {delta} is not an integer multiple of tau={tau}")
    return r
