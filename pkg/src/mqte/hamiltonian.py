"""Heisenberg Hamiltonians on open chains and rectangular grids."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .quantum import MAX_QUBITS, PauliString


@dataclass(frozen=True)
class Geometry:
    kind: str  # "chain", "grid" or "custom"
    rows: int = 1
    cols: int = 1

    @classmethod
    def chain(cls, length: int) -> "Geometry":
        return cls("chain", 1, length)

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Geometry":
        return cls("grid", rows, cols)

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Hamiltonian:
    n_qubits: int
    terms: tuple[PauliString, ...]
    geometry: Geometry = field(default_factory=lambda: Geometry("custom"))
    # nearest-neighbour bonds with their orientation ("h" or "v"); empty for custom input
    bonds: tuple[tuple[int, int, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.n_qubits != self.n_qubits:
                raise ValueError(
                    f"term {t.factors} does not act on {self.n_qubits} qubits"
                )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def is_real(self) -> bool:
        # real coefficients and an even number of Y factors give a real matrix
        return all(t.factors.count("Y") % 2 == 0 for t in self.terms)

    def dense_matrix(self) -> np.ndarray:
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"register of {self.n_qubits} qubits is too large")
        dtype = float if self.is_real() else complex
        h = np.zeros((self.dim, self.dim), dtype=dtype)
        cols = np.arange(self.dim)
        for term in self.terms:
            target, phase = term.action()
            if dtype is float:
                phase = phase.real
            h[target, cols] += term.coefficient * phase
        return h


def _heisenberg_terms(n: int, bonds, J: float, h: float) -> list[PauliString]:
    terms = []
    for a, b, _ in bonds:
        for letter, coeff in (("X", J), ("Y", J), ("Z", h)):
            if coeff == 0:
                continue
            f = ["I"] * n
            f[a] = f[b] = letter
            terms.append(PauliString("".join(f), float(coeff)))
    return terms


def build_heisenberg_1d(sites: int, J: float = 1.0, h: float = 2.0) -> Hamiltonian:
    """Open XXZ-type chain: J (XX + YY) + h ZZ on every nearest-neighbour bond."""
    if sites < 1:
        raise ValueError("a chain needs at least one site")
    bonds = tuple((j, j + 1, "h") for j in range(sites - 1))
    return Hamiltonian(sites, tuple(_heisenberg_terms(sites, bonds, J, h)),
                       Geometry.chain(sites), bonds)


def build_heisenberg_2d(rows: int, cols: int, J: float = 1.0, h: float = 2.0) -> Hamiltonian:
    """Open rectangular lattice, sites indexed row-major (site = r * cols + c)."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    n = rows * cols
    bonds = []
    for r in range(rows):
        for c in range(cols - 1):
            bonds.append((r * cols + c, r * cols + c + 1, "h"))
    for r in range(rows - 1):
        for c in range(cols):
            bonds.append((r * cols + c, (r + 1) * cols + c, "v"))
    bonds = tuple(bonds)
    return Hamiltonian(n, tuple(_heisenberg_terms(n, bonds, J, h)),
                       Geometry.grid(rows, cols), bonds)


def neel_state(geometry: Geometry) -> str:
    """Antiferromagnetic reference pattern, starting with spin-up (bit 0)."""
    if geometry.kind == "chain":
        return "".join(str(j % 2) for j in range(geometry.cols))
    if geometry.kind == "grid":
        return "".join(
            str((r + c) % 2) for r in range(geometry.rows) for c in range(geometry.cols)
        )
    raise ValueError(f"no Neel pattern defined for {geometry.kind!r} geometry")


_FACTOR_RE = re.compile(r"^([IXYZ])(\d+)$")


def parse_pauli_term(text: str, n_qubits: int) -> PauliString:
    """Parse ``"1.0 * X0 X1"`` into a PauliString on ``n_qubits`` qubits."""
    if "*" in text:
        coeff_txt, ops = text.split("*", 1)
        coeff = float(coeff_txt)
    else:
        coeff, ops = 1.0, text
    factors = ["I"] * n_qubits
    for tok in ops.split():
        m = _FACTOR_RE.match(tok.upper())
        if not m:
            raise ValueError(f"cannot parse Pauli factor {tok!r} in {text!r}")
        q = int(m.group(2))
        if q >= n_qubits:
            raise ValueError(f"site {q} outside a {n_qubits}-qubit register")
        if factors[q] != "I":
            raise ValueError(f"site {q} appears twice in {text!r}")
        factors[q] = m.group(1)
    return PauliString("".join(factors), coeff)


def custom_hamiltonian(n_qubits: int, terms) -> Hamiltonian:
    """Build a Hamiltonian from text terms or PauliString objects.

    Zero-coefficient terms are dropped. A warning is emitted when the
    resulting matrix is not real symmetric, since the signal analysis
    assumes real overlap coefficients.
    """
    parsed = []
    for t in terms:
        p = t if isinstance(t, PauliString) else parse_pauli_term(t, n_qubits)
        if p.coefficient != 0:
            parsed.append(p)
    ham = Hamiltonian(n_qubits, tuple(parsed))
    if not ham.is_real():
        warnings.warn(
            "Hamiltonian is not real symmetric; gap positions remain valid but "
            "peak weights lose their overlap-product interpretation",
            stacklevel=2,
        )
    return ham
