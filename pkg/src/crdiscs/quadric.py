"""Closed-form attached discs for quadric graph manifolds.

For a Hermitian quadric q and the polynomial disc
``W(zeta) = sum_j t_j a_j zeta^j`` (index 0 is the base point), the unique
analytic completion with boundary on ``{y = q(w, wbar)}`` and prescribed
``Re G(0) = x`` is

    G(zeta) = x + i sum_j t_j^2 q(a_j, abar_j)
                + 2i sum_{0 <= k < j} t_j t_k q(a_j, abar_k) zeta^(j-k).

This module evaluates that formula, the center map, and the exact
t-derivatives of the boundary data used by the rank analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circle import CircleGrid, FourierSeries
from .manifolds import QuadricForm


@dataclass(frozen=True)
class DiscFamilyParams:
    """Base point, directions and scales of a polynomial disc family.

    ``x`` and ``a0`` (with weight ``t0``, default 1) give the base point
    ``p = (x, t0 a0)``; ``directions[j-1]`` and ``scales[j-1]`` are the
    coefficient data of the frequency-j mode, j = 1..N.
    """

    x: np.ndarray
    directions: np.ndarray
    scales: np.ndarray
    a0: np.ndarray | None = None
    t0: float = 1.0
    family_radius: float = 1.0

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=complex))
        scales = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if dirs.shape[0] != scales.shape[0]:
            raise ValueError("directions and scales must have matching length")
        if scales.shape[0] < 1:
            raise ValueError("a disc family needs at least one mode")
        a0 = self.a0
        if a0 is None:
            a0 = np.zeros(dirs.shape[1], dtype=complex)
        a0 = np.atleast_1d(np.asarray(a0, dtype=complex))
        if a0.shape != (dirs.shape[1],):
            raise ValueError("a0 dimension must match the directions")
        moments = np.abs(scales) * np.linalg.norm(dirs, axis=1)
        if moments.max(initial=0.0) > self.family_radius:
            raise ValueError(
                f"|t_j||a_j| = {moments.max():.4f} exceeds family radius {self.family_radius}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "a0", a0)

    @property
    def N(self) -> int:
        return self.scales.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.directions.shape[1]

    @cached_property
    def full_directions(self) -> np.ndarray:
        """Directions including index 0: shape (N+1, m)."""
        return np.vstack([self.a0[None, :], self.directions])

    @cached_property
    def full_scales(self) -> np.ndarray:
        return np.concatenate([[self.t0], self.scales])

    def with_scales(self, scales) -> "DiscFamilyParams":
        return DiscFamilyParams(
            self.x, self.directions, np.asarray(scales, dtype=float),
            self.a0, self.t0, self.family_radius,
        )

    def with_x(self, x) -> "DiscFamilyParams":
        return DiscFamilyParams(
            np.asarray(x, dtype=float), self.directions, self.scales,
            self.a0, self.t0, self.family_radius,
        )

    def with_directions(self, directions) -> "DiscFamilyParams":
        return DiscFamilyParams(
            self.x, np.asarray(directions, dtype=complex), self.scales,
            self.a0, self.t0, self.family_radius,
        )

    def w_series(self, grid: CircleGrid) -> FourierSeries:
        """The disc W as an analytic series on the grid."""
        if self.N > grid.size // 2 - 1:
            raise ValueError(f"family with N={self.N} modes needs a finer grid than {grid.size}")
        coeffs = {0: self.t0 * self.a0}
        for j in range(1, self.N + 1):
            coeffs[j] = self.full_scales[j] * self.full_directions[j]
        return FourierSeries.from_coefficients(coeffs, grid, self.m)

    def w_boundary(self, angles: np.ndarray) -> np.ndarray:
        """W(e^{i phi}) evaluated directly at the given angles."""
        z = np.exp(1j * angles)[:, None]
        out = np.zeros((angles.shape[0], self.m), dtype=complex)
        for j in range(0, self.N + 1):
            out += self.full_scales[j] * self.full_directions[j][None, :] * z ** j
        return out


def closed_form_G(q: QuadricForm, params: DiscFamilyParams, grid: CircleGrid | None = None) -> FourierSeries:
    """The analytic disc component G for a quadric manifold, as a series."""
    if grid is None:
        grid = CircleGrid()
    a = params.full_directions
    t = params.full_scales
    N = params.N
    coeffs: dict = {}
    c0 = params.x.astype(complex)
    for j in range(N + 1):
        c0 = c0 + 1j * t[j] ** 2 * q(a[j])
    coeffs[0] = c0
    for j in range(1, N + 1):
        for k in range(j):
            val = 2j * t[j] * t[k] * q(a[j], np.conj(a[k]))
            key = j - k
            coeffs[key] = coeffs.get(key, np.zeros(params.d, dtype=complex)) + val
    return FourierSeries.from_coefficients(coeffs, grid, params.d)


def center_map(q: QuadricForm, params: DiscFamilyParams) -> np.ndarray:
    """Disc center A(0) = (x + i sum t_j^2 q(a_j, abar_j), t0 a0) in C^n."""
    a = params.full_directions
    t = params.full_scales
    v0 = np.zeros(params.d)
    for j in range(params.N + 1):
        v0 = v0 + t[j] ** 2 * q(a[j])
    return np.concatenate([params.x + 1j * v0, params.t0 * params.a0])


def v_center(q: QuadricForm, params: DiscFamilyParams) -> np.ndarray:
    """Imaginary part of the center, v(0) = sum_j t_j^2 q(a_j, abar_j)."""
    a = params.full_directions
    t = params.full_scales
    v0 = np.zeros(params.d)
    for j in range(params.N + 1):
        v0 = v0 + t[j] ** 2 * q(a[j])
    return v0


def dReG_dt(q: QuadricForm, params: DiscFamilyParams, j: int, zeta: complex) -> np.ndarray:
    """Exact derivative of Re G(zeta) in the scale t_j, |zeta| = 1.

    Evaluates the four-sum expression
    ``i (S1 + S2 - conj S1 - conj S2)`` with
    ``S1 = sum_{k<j} t_k q(a_j, abar_k) zeta^(j-k)`` and
    ``S2 = sum_{k>j} t_k q(a_k, abar_j) zeta^(k-j)``; the sums include the
    base index k = 0 so the value matches the t-derivative of
    :func:`closed_form_G` also when ``a0 != 0``.
    """
    if abs(abs(zeta) - 1.0) > 1e-9:
        raise ValueError("zeta must lie on the unit circle")
    a = params.full_directions
    t = params.full_scales
    N = params.N
    if not 1 <= j <= N:
        raise ValueError(f"mode index {j} outside 1..{N}")
    zeta = complex(zeta)
    s1 = np.zeros(params.d, dtype=complex)
    s2 = np.zeros(params.d, dtype=complex)
    for k in range(0, j):
        s1 += t[k] * q(a[j], np.conj(a[k])) * zeta ** (j - k)
    for k in range(j + 1, N + 1):
        s2 += t[k] * q(a[k], np.conj(a[j])) * zeta ** (k - j)
    val = 1j * (s1 + s2 - np.conj(s1) - np.conj(s2))
    return val.real


def dv0_dt(q: QuadricForm, params: DiscFamilyParams, j: int) -> np.ndarray:
    """Exact derivative of v(0) in t_j: 2 t_j q(a_j, abar_j)."""
    if not 1 <= j <= params.N:
        raise ValueError(f"mode index {j} outside 1..{params.N}")
    return 2.0 * params.scales[j - 1] * q(params.directions[j - 1])
