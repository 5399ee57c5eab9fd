"""Real-even DFT of time-resolved probabilities and peak detection.

A series p(0..N) is treated as the even sequence p(-N..N) of length 2N+1.
Its DFT is real and even; bin k corresponds to the energy gap
2*pi*k / ((2N+1) * delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# sizes (bins * samples) above which the cosine sum hands over to the FFT
_COSINE_LIMIT = 2_000_000


@dataclass(frozen=True)
class Spectrum:
    coeffs: np.ndarray  # F(k), k = 0..N
    delta: float
    n_points: int

    @property
    def bins(self) -> np.ndarray:
        return np.arange(len(self.coeffs))

    @property
    def x(self) -> np.ndarray:
        return self.bins / ((2 * self.n_points + 1) * self.delta)

    @property
    def gaps(self) -> np.ndarray:
        return 2 * np.pi * self.x

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(2 * self.coeffs)


@dataclass(frozen=True)
class Peak:
    bin: int
    gap: float
    amplitude: float  # signed 2F(k)
    magnitude: float
    significance: float  # magnitude / sigma; inf when sigma == 0

    def as_dict(self) -> dict:
        return {
            "bin": self.bin,
            "gap": self.gap,
            "amplitude": self.amplitude,
            "magnitude": self.magnitude,
            "significance": self.significance,
        }


@dataclass(frozen=True)
class SamplingPlan:
    n_points: int
    delta: float
    resolution: float  # bin width in energy units
    nyquist_gap: float  # pi / delta
    aliased: bool = False
    folded: dict = field(default_factory=dict)  # gap -> apparent gap


def extend_even(values: np.ndarray) -> np.ndarray:
    """p(0..N) -> p over n = -N..N in natural order."""
    values = np.asarray(values, dtype=float)
    return np.concatenate((values[:0:-1], values))


def _cosine_dft(values: np.ndarray, bins: np.ndarray, chunk: int = 256) -> np.ndarray:
    n_pts = len(values) - 1
    length = 2 * n_pts + 1
    n = np.arange(1, n_pts + 1)
    out = np.empty(len(bins))
    for s in range(0, len(bins), chunk):
        k = bins[s:s + chunk]
        # reduce k*n modulo the period before the cosine to keep arguments small
        phase = (np.outer(k, n) % length) * (2 * np.pi / length)
        out[s:s + chunk] = values[0] + 2 * (np.cos(phase) @ values[1:])
    return out / length


def _fft_dft(values: np.ndarray) -> np.ndarray:
    n_pts = len(values) - 1
    length = 2 * n_pts + 1
    # index order 0..N, then -N..-1
    ext = np.concatenate((values, values[:0:-1]))
    f = np.fft.fft(ext) / length
    if np.max(np.abs(f.imag), initial=0.0) > 1e-9:
        raise ValueError("DFT of an even real series has an imaginary residue")
    return f.real[: n_pts + 1]


def dft_real_even(values, delta: float, method: str = "auto", bins=None) -> Spectrum:
    """F(k) = [p(0) + 2 sum_n p(n) cos(2 pi k n / (2N+1))] / (2N+1).

    ``method`` is "cosine" (direct sum), "fft" or "auto". When ``bins`` is
    given only those coefficients are computed (cosine sum); the returned
    spectrum then holds zeros elsewhere.
    """
    values = np.asarray(getattr(values, "values", values), dtype=float)
    if values.ndim != 1 or len(values) < 1:
        raise ValueError("expected a one-dimensional series")
    if not np.all(np.isfinite(values)):
        raise ValueError("series contains non-finite values")
    n_pts = len(values) - 1
    if bins is not None:
        bins = np.asarray(bins, dtype=np.int64)
        coeffs = np.zeros(n_pts + 1)
        coeffs[bins] = _cosine_dft(values, bins)
        return Spectrum(coeffs, float(delta), n_pts)
    if method == "auto":
        method = "cosine" if (n_pts + 1) ** 2 <= _COSINE_LIMIT else "fft"
    if method == "cosine":
        coeffs = _cosine_dft(values, np.arange(n_pts + 1))
    elif method == "fft":
        coeffs = _fft_dft(values)
    else:
        raise ValueError(f"unknown DFT method {method!r}")
    return Spectrum(coeffs, float(delta), n_pts)


def inverse_dft_real_even(coeffs) -> np.ndarray:
    """Rebuild p(0..N) from F(0..N)."""
    coeffs = np.asarray(getattr(coeffs, "coeffs", coeffs), dtype=float)
    n_pts = len(coeffs) - 1
    length = 2 * n_pts + 1
    ext = np.concatenate((coeffs, coeffs[:0:-1])) * length
    return np.fft.ifft(ext).real[: n_pts + 1]


def gap_from_bin(k, n_points: int, delta: float):
    return 2 * np.pi * np.asarray(k) / ((2 * n_points + 1) * delta)


def bin_from_gap(gap, n_points: int, delta: float):
    """Fractional bin position of an energy gap."""
    return np.asarray(gap) * (2 * n_points + 1) * delta / (2 * np.pi)


def bin_width(n_points: int, delta: float) -> float:
    return 2 * np.pi / ((2 * n_points + 1) * delta)


def fold_gap(gap, delta: float):
    """Apparent gap of a component sampled every ``delta`` (Nyquist folding)."""
    period = 2 * np.pi / delta
    g = np.mod(np.asarray(gap, dtype=float), period)
    return np.minimum(g, period - g)


def plan_sampling(delta: float, epsilon: float, max_gap=None) -> SamplingPlan:
    """N = ceil(pi / (delta * epsilon)), plus an aliasing diagnostic.

    ``max_gap`` may be a single gap or a collection of gaps (for instance the
    oracle's gap table); any gap at or above pi/delta is reported with its
    folded image.
    """
    if delta <= 0 or epsilon <= 0:
        raise ValueError("delta and epsilon must be positive")
    raw = math.pi / (delta * epsilon)
    # guard against ceil(20000.000000000004)
    n_points = max(1, math.ceil(raw - 1e-9 * raw))
    nyquist = math.pi / delta
    folded = {}
    if max_gap is not None:
        for g in np.atleast_1d(np.asarray(max_gap, dtype=float)):
            if g >= nyquist:
                folded[float(g)] = float(fold_gap(g, delta))
    return SamplingPlan(n_points, delta, bin_width(n_points, delta), nyquist,
                        bool(folded), folded)


def noise_sigma_bound(n_points: int, shots: int) -> float:
    """Upper bound 1/sqrt(2 N M) on the spread of the sampling-noise term |2S(k)|."""
    if shots == 0:
        return 0.0
    if n_points < 1 or shots < 0:
        raise ValueError("need N >= 1 and M >= 0")
    return 1.0 / math.sqrt(2.0 * n_points * shots)


def empirical_sigma(spectrum: Spectrum) -> float:
    """Robust noise-level estimate from the median of |2F(k)|, k >= 1.

    For half-normal magnitudes the median equals 0.6745 sigma; sparse
    peaks barely move it.
    """
    mags = spectrum.magnitude[1:]
    if len(mags) == 0:
        return 0.0
    return float(np.median(mags) / 0.6744897501960817)


def detect_peaks(spectrum: Spectrum, sigma: float, threshold_multiplier: float = 4.0,
                 floor: float = 1e-12) -> list[Peak]:
    """Peaks of |2F(k)| above max(multiplier * sigma, floor), k >= 1.

    Contiguous runs of bins above the threshold count as one peak, located
    at the run's largest bin. Result is sorted by magnitude, largest first.
    """
    if sigma < 0 or threshold_multiplier < 0:
        raise ValueError("sigma and the threshold multiplier must be non-negative")
    mags = spectrum.magnitude
    threshold = max(threshold_multiplier * sigma, floor)
    above = mags > threshold
    above[0] = False
    peaks = []
    k = 1
    while k < len(mags):
        if not above[k]:
            k += 1
            continue
        end = k
        while end + 1 < len(mags) and above[end + 1]:
            end += 1
        best = k + int(np.argmax(mags[k:end + 1]))
        amp = 2 * float(spectrum.coeffs[best])
        sig = abs(amp) / sigma if sigma > 0 else math.inf
        peaks.append(Peak(best, float(spectrum.gaps[best]), amp, abs(amp), sig))
        k = end + 1
    peaks.sort(key=lambda p: (-p.magnitude, p.bin))
    return peaks
