"""Trigonometric collocation on the unit circle.

Functions live as samples on an equispaced angle grid. The conjugate-function
transform (Hilbert transform normalized to vanish at the disc center) and
analytic completion are realized as Fourier multipliers; on the representable
class of trigonometric polynomials these coincide with the harmonic-conjugate
definitions.

Aliasing: frequencies with ``|k| < size/2`` are fully faithful. The Nyquist
mode ``k = size/2`` is self-conjugate on the grid (its sine partner samples to
zero), so the transform annihilates it; band-limited inputs should stay below
it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: absolute tolerance on the imaginary part of "real" sample vectors
IMAG_TOL = 1e-9

#: default grid resolution
DEFAULT_GRID_SIZE = 256


@dataclass(frozen=True)
class CircleGrid:
    """Equispaced angles ``phi_m = 2*pi*m/size`` on the unit circle."""

    size: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        if self.size < 4 or self.size % 2 != 0:
            raise ValueError(f"grid size must be even and >= 4, got {self.size}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.size) / self.size

    @property
    def points(self) -> np.ndarray:
        """Grid nodes as unit complex numbers."""
        return np.exp(1j * self.angles)

    def frequencies(self) -> np.ndarray:
        """Frequency label of each FFT bin: 0..size/2, then negatives."""
        n = self.size
        k = np.arange(n)
        k[k > n // 2] -= n
        return k

    def refine(self, factor: int = 2) -> "CircleGrid":
        return CircleGrid(self.size * factor)


def _as_samples(values, size: int) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != size:
        raise ValueError(f"expected {size} samples, got shape {arr.shape}")
    return arr


class FourierSeries:
    """Truncated Fourier coefficients of a (vector-valued) circle function.

    Internally stores one complex coefficient array per FFT bin, labeled by
    the frequencies ``-size/2+1 .. size/2``. A series is *analytic* when all
    negative-frequency coefficients vanish; it then extends to the closed
    unit disc as a power series.
    """

    def __init__(self, bins: np.ndarray, grid: CircleGrid):
        bins = np.asarray(bins, dtype=complex)
        if bins.ndim == 1:
            bins = bins[:, None]
        if bins.shape[0] != grid.size:
            raise ValueError("coefficient bins do not match grid size")
        self._bins = bins
        self.grid = grid

    @property
    def dim(self) -> int:
        return self._bins.shape[1]

    @classmethod
    def from_coefficients(cls, coeffs: dict, grid: CircleGrid, dim: int) -> "FourierSeries":
        bins = np.zeros((grid.size, dim), dtype=complex)
        half = grid.size // 2
        for k, vec in coeffs.items():
            if abs(k) > half:
                raise ValueError(f"frequency {k} not representable on size-{grid.size} grid")
            bins[k % grid.size] += np.asarray(vec, dtype=complex).reshape(dim)
        return cls(bins, grid)

    @property
    def coefficients(self) -> dict:
        freqs = self.grid.frequencies()
        return {int(k): self._bins[i].copy() for i, k in enumerate(freqs)}

    def coefficient(self, k: int) -> np.ndarray:
        half = self.grid.size // 2
        if abs(k) > half:
            return np.zeros(self.dim, dtype=complex)
        return self._bins[k % self.grid.size].copy()

    def synthesize(self) -> np.ndarray:
        return np.fft.ifft(self._bins * self.grid.size, axis=0)

    def synthesize_on(self, grid: CircleGrid) -> np.ndarray:
        """Trigonometric interpolation onto a finer grid."""
        if grid.size == self.grid.size:
            return self.synthesize()
        if grid.size < self.grid.size:
            raise ValueError("target grid must be at least as fine")
        bins = np.zeros((grid.size, self.dim), dtype=complex)
        for i, k in enumerate(self.grid.frequencies()):
            bins[int(k) % grid.size] += self._bins[i]
        return np.fft.ifft(bins * grid.size, axis=0)

    def negative_weight(self) -> float:
        """Largest coefficient magnitude at strictly negative frequency."""
        freqs = self.grid.frequencies()
        mask = freqs < 0
        if not mask.any():
            return 0.0
        return float(np.abs(self._bins[mask]).max(initial=0.0))

    def is_analytic(self, tol: float = 1e-12) -> bool:
        return self.negative_weight() <= tol

    def analytic_part(self) -> "FourierSeries":
        bins = self._bins.copy()
        bins[self.grid.frequencies() < 0] = 0.0
        return FourierSeries(bins, self.grid)

    def conjugate_symmetry_defect(self) -> float:
        """Max |c_{-k} - conj(c_k)| over representable pairs (real-data check)."""
        half = self.grid.size // 2
        worst = 0.0
        for k in range(1, half):
            worst = max(worst, float(np.abs(self.coefficient(-k) - np.conj(self.coefficient(k))).max()))
        worst = max(worst, float(np.abs(self.coefficient(half).imag).max()))
        worst = max(worst, float(np.abs(self.coefficient(0).imag).max()))
        return worst

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        if other.grid.size != self.grid.size or other.dim != self.dim:
            raise ValueError("incompatible series")
        return FourierSeries(self._bins + other._bins, self.grid)

    def shift_constant(self, delta) -> "FourierSeries":
        bins = self._bins.copy()
        bins[0] += np.asarray(delta, dtype=complex).reshape(self.dim)
        return FourierSeries(bins, self.grid)

    def __repr__(self):
        nz = int(np.count_nonzero(np.abs(self._bins).max(axis=1) > 1e-15))
        return f"FourierSeries(dim={self.dim}, grid={self.grid.size}, active_modes={nz})"


def fourier_analyze(samples, grid: CircleGrid) -> FourierSeries:
    """Coefficients of the trigonometric interpolant through the samples."""
    arr = _as_samples(samples, grid.size)
    return FourierSeries(np.fft.fft(arr, axis=0) / grid.size, grid)


def fourier_synthesize(series: FourierSeries) -> np.ndarray:
    return series.synthesize()


def _require_real(u, label: str = "input") -> np.ndarray:
    arr = np.asarray(u)
    if np.iscomplexobj(arr):
        worst = float(np.abs(arr.imag).max(initial=0.0))
        if worst > IMAG_TOL:
            raise ValueError(f"{label} must be real-valued (max imag {worst:.3e})")
        arr = arr.real
    return np.asarray(arr, dtype=float)


def _multiplier(size: int) -> np.ndarray:
    half = size // 2
    mult = np.zeros(size, dtype=complex)
    mult[1:half] = -1j
    mult[half + 1 :] = 1j
    return mult


def hilbert_transform(u, grid: CircleGrid | None = None) -> np.ndarray:
    """Boundary values of the harmonic conjugate vanishing at the origin.

    In frequency space: mode k picks up the factor -i*sign(k); the constant
    mode maps to zero, which pins the conjugate to 0 at the disc center.
    """
    arr = _require_real(u)
    squeeze = arr.ndim == 1
    if arr.ndim == 1:
        arr = arr[:, None]
    size = arr.shape[0]
    if grid is not None and grid.size != size:
        raise ValueError(f"sample count {size} does not match grid size {grid.size}")
    spec = np.fft.fft(arr, axis=0)
    out = np.fft.ifft(_multiplier(size)[:, None] * spec, axis=0).real
    return out[:, 0] if squeeze else out


@lru_cache(maxsize=8)
def hilbert_matrix(size: int) -> np.ndarray:
    """Dense matrix of the transform on a size-``size`` grid.

    Used by the solver kernels so that both backends apply exactly the same
    linear operator without per-iteration FFT plumbing.
    """
    spec = np.fft.fft(np.eye(size), axis=0)
    mat = np.fft.ifft(_multiplier(size)[:, None] * spec, axis=0).real
    mat.setflags(write=False)
    return mat


def analytic_completion(u_boundary, x, grid: CircleGrid | None = None) -> FourierSeries:
    """Analytic series G with Re G = the given boundary data and Re G(0) = x.

    The mean of the boundary data is replaced by ``x`` in the constant mode,
    so when ``mean(u) != x`` the realized boundary real part is shifted by the
    constant ``x - mean(u)``.
    """
    arr = _require_real(u_boundary, "boundary data")
    if arr.ndim == 1:
        arr = arr[:, None]
    size = arr.shape[0]
    if grid is None:
        grid = CircleGrid(size)
    elif grid.size != size:
        raise ValueError(f"sample count {size} does not match grid size {grid.size}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (arr.shape[1],):
        raise ValueError(f"center value has dimension {x.shape}, expected ({arr.shape[1]},)")
    half = size // 2
    spec = np.fft.fft(arr, axis=0) / size
    bins = np.zeros_like(spec)
    bins[0] = x
    bins[1:half] = 2.0 * spec[1:half]
    bins[half] = spec[half]
    return FourierSeries(bins, grid)


def evaluate_disc(series: FourierSeries, zeta: complex, tol: float = 1e-12) -> np.ndarray:
    """Power-series evaluation of an analytic series at |zeta| <= 1."""
    if abs(zeta) > 1.0 + tol:
        raise ValueError(f"evaluation point |zeta| = {abs(zeta):.6f} lies outside the closed disc")
    neg = series.negative_weight()
    if neg > tol:
        raise ValueError(f"series is not analytic (negative-frequency weight {neg:.3e})")
    half = series.grid.size // 2
    zeta = complex(zeta)
    out = np.zeros(series.dim, dtype=complex)
    zpow = 1.0 + 0.0j
    for k in range(half + 1):
        c = series._bins[k % series.grid.size]
        out += c * zpow
        zpow *= zeta
    return out
