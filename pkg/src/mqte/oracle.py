"""Exact diagonalization reference: eigensystem, gap/weight tables, predicted signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian
from .quantum import bits_to_index

MAX_DIAG_QUBITS = 14
GAP_MERGE_TOL = 1e-9
# products of overlaps below this are symmetry zeros, not physics
_ZERO_WEIGHT = 1e-14


@dataclass(frozen=True)
class Eigensystem:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # columns are eigenvectors
    n_qubits: int

    @property
    def dim(self) -> int:
        return len(self.energies)

    def overlaps(self, bits: str) -> np.ndarray:
        """c_k = <Psi_k|bits> for every eigenstate k."""
        if len(bits) != self.n_qubits:
            raise ValueError(f"bitstring {bits!r} does not match {self.n_qubits} qubits")
        return np.conj(self.vectors[bits_to_index(bits), :])


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component of every eigenvector made real positive
    rows = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[rows, np.arange(vectors.shape[1])]
    if np.iscomplexobj(vectors):
        return vectors * (np.abs(pivot) / pivot)
    return vectors * np.sign(pivot)


def diagonalize(h: Hamiltonian) -> Eigensystem:
    if h.n_qubits > MAX_DIAG_QUBITS:
        raise ValueError(
            f"full diagonalization is capped at {MAX_DIAG_QUBITS} qubits "
            f"(got {h.n_qubits})"
        )
    energies, vectors = np.linalg.eigh(h.dense_matrix())
    return Eigensystem(energies, _fix_gauge(vectors), h.n_qubits)


def _pair_table(eig: Eigensystem, i: str, j: str):
    """Gaps E_k - E_k' (k > k') and weights c*_k'j c_k'i c_kj c*_ki over active pairs."""
    ci = eig.overlaps(i)
    cj = eig.overlaps(j)
    u = np.conj(cj) * ci
    if np.iscomplexobj(u) and np.max(np.abs(u.imag), initial=0.0) < 1e-12:
        u = u.real
    active = np.flatnonzero(np.abs(u) > _ZERO_WEIGHT)
    e = eig.energies[active]
    ua = u[active]
    a, b = np.triu_indices(len(active), k=1)
    # energies are ascending, so E[b] >= E[a]
    gaps = e[b] - e[a]
    weights = ua[a] * np.conj(ua[b])
    background = float(np.sum(np.abs(ci) ** 2 * np.abs(cj) ** 2))
    return gaps, weights, background


def _merge(gaps: np.ndarray, weights: np.ndarray):
    order = np.argsort(gaps, kind="stable")
    gaps, weights = gaps[order], weights[order]
    if len(gaps) == 0:
        return gaps, weights
    new_group = np.concatenate(([True], np.diff(gaps) > GAP_MERGE_TOL))
    group = np.cumsum(new_group) - 1
    if np.iscomplexobj(weights):
        merged_w = np.bincount(group, weights.real) + 1j * np.bincount(group, weights.imag)
    else:
        merged_w = np.bincount(group, weights)
    merged_g = gaps[new_group]
    return merged_g, merged_w


def reference_peaks(eig: Eigensystem, i: str, j: str, weight_floor: float = 0.0):
    """Merged (gap, summed weight) pairs sorted by gap.

    The weight of a pair is c_k'j c_k'i c_kj c_ki; zero gaps (degenerate
    pairs) land in the constant background and are not listed.
    """
    if weight_floor < 0:
        raise ValueError("weight_floor must be non-negative")
    gaps, weights, _ = _pair_table(eig, i, j)
    gaps, weights = _merge(gaps, weights)
    keep = (gaps > GAP_MERGE_TOL) & (np.abs(weights) >= weight_floor) & (np.abs(weights) > _ZERO_WEIGHT)
    return [(float(g), complex(w) if np.iscomplexobj(weights) else float(w))
            for g, w in zip(gaps[keep], weights[keep])]


def predicted_signal(eig: Eigensystem, i: str, j: str, n_points: int, delta: float,
                     chunk: int = 2048) -> np.ndarray:
    """Closed-form p_ij(n) for n = 0..n_points as a background plus cosines.

    Evaluates the constant term plus one cosine per pair of eigenstates with
    non-vanishing overlap products; assumes real overlaps.
    """
    gaps, weights, background = _pair_table(eig, i, j)
    if np.iscomplexobj(weights):
        raise ValueError("predicted_signal requires real overlap coefficients")
    gaps, weights = _merge(gaps, weights)
    # degenerate pairs contribute 2w to the constant
    zero = gaps <= GAP_MERGE_TOL
    background += 2.0 * float(np.sum(weights[zero]))
    gaps, weights = gaps[~zero], weights[~zero]
    t = np.arange(n_points + 1) * delta
    out = np.full(n_points + 1, background)
    for s in range(0, len(t), chunk):
        out[s:s + chunk] += 2.0 * (np.cos(np.outer(t[s:s + chunk], gaps)) @ weights)
    return out
