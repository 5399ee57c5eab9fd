"""Time-resolved probability signals, exact or estimated from finite shots."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evolution import run_gates, steps_per_interval
from .oracle import Eigensystem
from .quantum import bits_to_index, index_to_bits

# stream tags for counter-based random streams
SHOTS_STREAM = 1
NOISE_STREAM = 2
OUTCOME_STREAM = 3

# largest (N+1) x 2**n table kept in memory when configs are chosen automatically
_FULL_TABLE_BYTES = 1_000_000_000


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...), identical under any schedule."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class SignalSeries:
    config: str
    ref: str
    delta: float
    n_points: int
    values: np.ndarray  # p(n), n = 0..N
    shots: int = 0  # 0 means exact probabilities
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __getitem__(self, n):
        # even extension: p(-n) = p(n)
        return self.values[abs(n)]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points + 1) * self.delta

    def extended(self) -> np.ndarray:
        return np.concatenate((self.values[:0:-1], self.values))

    def metadata(self) -> dict:
        return {
            "ref": self.ref,
            "config": self.config,
            "delta": self.delta,
            "N": self.n_points,
            "M": self.shots,
            "seed": self.seed,
            **self.meta,
        }


def sampling_variance(p: float, shots: int) -> float:
    """Binomial variance p(1-p)/M of an empirical frequency."""
    if shots < 1:
        raise ValueError("need at least one shot")
    return p * (1.0 - p) / shots


class ExactPropagator:
    """Spectral propagation exp(-iHt) from one shared diagonalization."""

    def __init__(self, eig: Eigensystem, workers: int = 1, chunk: int = 512):
        self.eig = eig
        self.n_qubits = eig.n_qubits
        self.workers = max(1, int(workers))
        self.chunk = chunk

    def distributions(self, ref: str, n_points: int, delta: float, columns=None):
        c = self.eig.overlaps(ref)
        active = np.flatnonzero(np.abs(c) > 1e-14)
        vecs = self.eig.vectors[:, active]
        if columns is not None:
            vecs = vecs[np.asarray(columns)]
        energies = self.eig.energies[active]
        coeff = c[active]
        vt = vecs.T

        def block(start):
            t = np.arange(start, min(start + self.chunk, n_points + 1)) * delta
            amps = (np.exp(-1j * np.outer(t, energies)) * coeff) @ vt
            return start, np.abs(amps) ** 2

        starts = range(0, n_points + 1, self.chunk)
        if self.workers == 1:
            yield from map(block, starts)
        else:
            with ThreadPoolExecutor(self.workers) as pool:
                yield from pool.map(block, starts)


class CircuitPropagator:
    """Sequential replay of a gate sequence, one sampling interval at a time.

    ``circuit`` needs ``n_qubits`` and ``step_gates``. For Trotter circuits
    the number of steps per interval is delta / tau; circuits carrying their
    own ``delta`` (random step circuits) advance one step per interval.
    """

    def __init__(self, circuit, dense_limit: int = 10):
        self.circuit = circuit
        self.n_qubits = circuit.n_qubits
        self.dense_limit = dense_limit

    def steps_for(self, delta: float) -> int:
        tau = getattr(self.circuit, "tau", None)
        if tau is not None:
            return steps_per_interval(delta, tau)
        own = getattr(self.circuit, "delta", None)
        if own is not None and abs(own - delta) > 1e-12 * max(1.0, own):
            raise ValueError(f"circuit was generated for delta={own}, not {delta}")
        return 1

    def interval_unitary(self, delta: float) -> np.ndarray:
        dim = 2**self.n_qubits
        rows = run_gates(np.eye(dim, dtype=complex), self.circuit.step_gates,
                         self.n_qubits, self.steps_for(delta))
        return rows.T

    def distributions(self, ref: str, n_points: int, delta: float, columns=None):
        n = self.n_qubits
        steps = self.steps_for(delta)
        psi = np.zeros(2**n, dtype=complex)
        psi[bits_to_index(ref)] = 1.0
        dense = self.interval_unitary(delta) if n <= self.dense_limit else None
        cols = slice(None) if columns is None else np.asarray(columns)
        for n_idx in range(n_points + 1):
            if n_idx:
                if dense is not None:
                    psi = dense @ psi
                else:
                    psi = run_gates(psi, self.circuit.step_gates, n, steps)
            yield n_idx, (np.abs(psi) ** 2)[cols][None, :]


def _normalized(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def draw_counts(dist: np.ndarray, shots: int, seed: int, n: int) -> np.ndarray:
    """Multinomial shot counts at time index ``n``."""
    return stream_rng(seed, SHOTS_STREAM, n).multinomial(shots, _normalized(dist))


def select_configs(mean_prob: np.ndarray, top_k, observed=None) -> np.ndarray:
    """Indices of the top-K configs by time-averaged probability (ties by index)."""
    order = np.lexsort((np.arange(len(mean_prob)), -mean_prob))
    if observed is not None:
        order = order[observed[order]]
    if top_k is not None:
        order = order[:top_k]
    return np.sort(order)


def _collect(chunks, n_points: int, width: int, dtype=float) -> np.ndarray:
    out = np.empty((n_points + 1, width), dtype=dtype)
    for start, block in chunks:
        out[start:start + len(block)] = block
    return out


def measure_signal(propagator, ref: str, n_points: int, delta: float, shots: int = 0,
                   seed: int = 0, configs=None, top_k=8) -> dict[str, SignalSeries]:
    """Record p_i,ref(n) for n = 0..N.

    ``shots == 0`` returns exact probabilities. Otherwise every time point
    gets ``shots`` full-register samples (one multinomial draw) and each
    value is count / shots. Configs are the explicit list ``configs`` or the
    ``top_k`` most probable on average; ``top_k=None`` keeps every config
    that was observed (sampled) or has non-zero probability (exact).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n_points < 1:
        raise ValueError("need at least one time step")
    if shots < 0:
        raise ValueError("shots must be non-negative")
    n_qubits = propagator.n_qubits
    dim = 2**n_qubits
    if len(ref) != n_qubits:
        raise ValueError(f"reference {ref!r} does not match {n_qubits} qubits")
    if hasattr(propagator, "steps_for"):
        propagator.steps_for(delta)  # validates the interval before any work

    explicit = None
    if configs is not None:
        explicit = np.array([bits_to_index(c) for c in configs])
        if any(len(c) != n_qubits for c in configs):
            raise ValueError("config bitstrings must match the register size")

    if shots == 0:
        if explicit is not None:
            table = _collect(propagator.distributions(ref, n_points, delta, explicit),
                             n_points, len(explicit))
            chosen = explicit
        else:
            if (n_points + 1) * dim * 8 > _FULL_TABLE_BYTES:
                raise ValueError("too many time points for automatic config selection; "
                                 "list the configs explicitly")
            full = _collect(propagator.distributions(ref, n_points, delta), n_points, dim)
            chosen = select_configs(full.mean(axis=0), top_k,
                                    observed=full.max(axis=0) > 1e-12)
            table = full[:, chosen]
    else:
        if (n_points + 1) * dim * 4 > _FULL_TABLE_BYTES:
            raise ValueError("shot table too large for this register and grid")
        counts = np.empty((n_points + 1, dim), dtype=np.int32)
        for start, block in propagator.distributions(ref, n_points, delta):
            for row, dist in enumerate(block):
                counts[start + row] = draw_counts(dist, shots, seed, start + row)
        if explicit is not None:
            chosen = explicit
        else:
            chosen = select_configs(counts.mean(axis=0), top_k,
                                    observed=counts.max(axis=0) > 0)
        table = counts[:, chosen] / shots

    return {
        index_to_bits(int(idx), n_qubits): SignalSeries(
            index_to_bits(int(idx), n_qubits), ref, float(delta), n_points,
            np.ascontiguousarray(table[:, col]), shots, seed)
        for col, idx in enumerate(chosen)
    }
