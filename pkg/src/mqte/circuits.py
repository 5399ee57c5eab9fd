"""Seeded random step circuits with a known effective Hamiltonian.

A step is U = V D V^dagger. V is a random layered circuit (rotation layers
alternating with CZ layers on a linear coupling) and D is a diagonal layer
of RZ and RZZ phase rotations. Because D(k * delta) = D(delta)**k, U**k can
be written at constant depth by scaling the phase angles, which is what the
constant-depth noise model uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .oracle import Eigensystem
from .quantum import Gate

_AXES = ("x", "y", "z")


def _rotation(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])


_CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class CircuitGate:
    name: str  # rx, ry, rz, cz, rzz
    qubits: tuple[int, ...]
    angle: float = 0.0
    timed: bool = False  # angle scales with the number of intervals

    def matrix(self, k: int = 1) -> np.ndarray:
        angle = self.angle * k if self.timed else self.angle
        if self.name == "cz":
            return _CZ
        if self.name == "rzz":
            return np.diag(np.exp(-0.5j * angle * np.array([1, -1, -1, 1])))
        return _rotation(self.name[1], angle)

    def inverse(self) -> "CircuitGate":
        if self.name == "cz":
            return self
        return CircuitGate(self.name, self.qubits, -self.angle, self.timed)

    def z_signs(self, n_qubits: int) -> np.ndarray:
        """Diagonal generator of a timed gate: phase = exp(-i angle k / 2 * sign)."""
        idx = np.arange(2**n_qubits)
        sign = np.ones(2**n_qubits)
        for q in self.qubits:
            sign *= 1 - 2 * ((idx >> (n_qubits - 1 - q)) & 1)
        return sign

    def to_dict(self) -> dict:
        return {"name": self.name, "qubits": list(self.qubits),
                "angle": self.angle, "timed": self.timed}


@dataclass(frozen=True)
class RandomStepCircuit:
    n_qubits: int
    basis: tuple[CircuitGate, ...]  # V, in application order
    phases: tuple[CircuitGate, ...]  # D for one interval
    delta: float
    depth: int
    seed: int

    def program(self, k: int = 1) -> list[CircuitGate]:
        """Constant-depth gate list for evolution by k intervals."""
        inv = [g.inverse() for g in reversed(self.basis)]
        timed = [CircuitGate(g.name, g.qubits, g.angle * k, True) for g in self.phases]
        return inv + timed + list(self.basis)

    def gates_for(self, k: int = 1) -> list[Gate]:
        return [Gate(g.qubits, g.matrix(), g.name) for g in self.program(k)]

    @property
    def step_gates(self) -> tuple[Gate, ...]:
        return tuple(self.gates_for(1))

    @property
    def gate_count_per_step(self) -> int:
        return len(self.basis) * 2 + len(self.phases)

    def step_unitary(self) -> np.ndarray:
        from .evolution import run_gates

        dim = 2**self.n_qubits
        return run_gates(np.eye(dim, dtype=complex), self.step_gates, self.n_qubits).T

    def to_json(self) -> str:
        return json.dumps({
            "n_qubits": self.n_qubits, "depth": self.depth, "seed": self.seed,
            "delta": self.delta,
            "basis": [g.to_dict() for g in self.basis],
            "phases": [g.to_dict() for g in self.phases],
            "step": [g.to_dict() for g in self.program(1)],
        }, indent=2)


def generate_random_step(n_qubits: int, depth: int = 1, seed: int = 0,
                         delta: float = 0.5) -> RandomStepCircuit:
    """Random step circuit: ``depth`` rotation/CZ layer pairs in V.

    Per step there are 2*depth + 1 single-qubit layers (n gates each) and
    2*depth + 1 two-qubit layers (n - 1 gates each, the last one being the
    RZZ phase layer).
    """
    if n_qubits < 1 or depth < 1:
        raise ValueError("need n_qubits >= 1 and depth >= 1")
    rng = np.random.default_rng(seed)
    pairs = [(q, q + 1) for q in range(n_qubits - 1)]
    basis = []
    for _ in range(depth):
        axes = rng.integers(0, 3, size=n_qubits)
        angles = rng.uniform(0, 2 * np.pi, size=n_qubits)
        basis += [CircuitGate("r" + _AXES[a], (q,), float(t))
                  for q, (a, t) in enumerate(zip(axes, angles))]
        basis += [CircuitGate("cz", p) for p in pairs]
    z_angles = rng.uniform(0, 2 * np.pi, size=n_qubits)
    zz_angles = rng.uniform(0, 2 * np.pi, size=len(pairs))
    phases = [CircuitGate("rz", (q,), float(a), True) for q, a in enumerate(z_angles)]
    phases += [CircuitGate("rzz", p, float(a), True) for p, a in zip(pairs, zz_angles)]
    return RandomStepCircuit(n_qubits, tuple(basis), tuple(phases), float(delta),
                             depth, int(seed))


def effective_eigensystem(circuit: RandomStepCircuit) -> Eigensystem:
    """Eigenphases theta of the step unitary as energies theta/delta in (-pi, pi]/delta.

    Uses a complex Schur form, which is diagonal for a unitary matrix.
    """
    if circuit.n_qubits > 10:
        raise ValueError("effective Hamiltonian oracle is limited to 10 qubits")
    t, z = scipy.linalg.schur(circuit.step_unitary(), output="complex")
    phases = -np.angle(np.diag(t))
    order = np.argsort(phases, kind="stable")
    return Eigensystem(phases[order] / circuit.delta, z[:, order], circuit.n_qubits)
