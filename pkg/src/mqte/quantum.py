"""Dense state-vector primitives.

Bit ordering used throughout the package: qubit 0 is the leftmost character
of a bitstring and the most significant bit of the basis index. Spin-up maps
to bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 16

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_size(n_qubits: int) -> None:
    if n_qubits < 1:
        raise ValueError(f"register needs at least one qubit, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise ValueError(
            f"dense simulation is limited to {MAX_QUBITS} qubits, got {n_qubits}"
        )


@dataclass(frozen=True)
class QuantumState:
    """Amplitudes over the 2**n computational basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_size(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class PauliString:
    """A weighted tensor product of single-qubit Pauli letters.

    ``factors`` holds one letter per qubit, e.g. ``"XXII"``.
    """

    factors: str
    coefficient: float = 1.0

    def __post_init__(self):
        factors = self.factors.upper()
        bad = set(factors) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.factors!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("Pauli coefficient must be finite")
        object.__setattr__(self, "factors", factors)

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, f in enumerate(self.factors) if f != "I")

    def masks(self) -> tuple[int, int, int]:
        """Return (x_mask, z_mask, number of Y factors) as basis-index bitmasks."""
        n = self.n_qubits
        x_mask = z_mask = 0
        n_y = 0
        for q, f in enumerate(self.factors):
            bit = 1 << (n - 1 - q)
            if f in "XY":
                x_mask |= bit
            if f in "ZY":
                z_mask |= bit
            if f == "Y":
                n_y += 1
        return x_mask, z_mask, n_y

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Index map and phases such that ``P|b> = phase[b] |target[b]>``.

        The coefficient is not included.
        """
        x_mask, z_mask, n_y = self.masks()
        idx = np.arange(2**self.n_qubits)
        parity = _popcount(idx & z_mask) & 1
        phase = (1j**n_y) * (1 - 2 * parity)
        return idx ^ x_mask, phase

    def matrix(self) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for f in self.factors:
            out = np.kron(out, PAULI_MATRICES[f])
        return self.coefficient * out


def _popcount(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    count = np.zeros_like(arr)
    while np.any(arr):
        count += arr & 1
        arr = arr >> 1
    return count


def bits_to_index(bits: str) -> int:
    if not bits or set(bits) - set("01"):
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(bits, 2)


def index_to_bits(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def basis_state(n_qubits: int, bits: str) -> QuantumState:
    if len(bits) != n_qubits:
        raise ValueError(f"bitstring {bits!r} does not have {n_qubits} entries")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[bits_to_index(bits)] = 1.0
    return QuantumState(n_qubits, amps)


def apply_pauli_string(state: QuantumState, p: PauliString) -> QuantumState:
    if p.n_qubits != state.n_qubits:
        raise ValueError(
            f"Pauli string acts on {p.n_qubits} qubits, state has {state.n_qubits}"
        )
    target, phase = p.action()
    out = np.empty_like(state.amplitudes)
    out[target] = p.coefficient * phase * state.amplitudes
    return QuantumState(state.n_qubits, out)


def probabilities(state: QuantumState) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("register sizes differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_matrix(psi: np.ndarray, matrix: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    """Apply a 2**k x 2**k unitary on ``qubits`` to raw amplitudes.

    ``psi`` may carry leading batch dimensions; the last axis is the basis index.
    """
    qubits = tuple(qubits)
    k = len(qubits)
    batch = psi.shape[:-1]
    nb = len(batch)
    t = psi.reshape(batch + (2,) * n_qubits)
    axes = [nb + q for q in qubits]
    dest = list(range(nb + n_qubits - k, nb + n_qubits))
    t = np.moveaxis(t, axes, dest)
    shape = t.shape
    t = t.reshape(shape[: nb + n_qubits - k] + (2**k,)) @ matrix.T
    t = np.moveaxis(t.reshape(shape), dest, axes)
    return t.reshape(batch + (2**n_qubits,))


def apply_gate(state: QuantumState, matrix: np.ndarray, qubits) -> QuantumState:
    return QuantumState(
        state.n_qubits, apply_matrix(state.amplitudes, np.asarray(matrix), qubits, state.n_qubits)
    )


@dataclass(frozen=True)
class Gate:
    """A unitary acting on a few qubits of a register."""

    qubits: tuple[int, ...]
    matrix: np.ndarray
    name: str = "U"
