"""Attached analytic discs via the boundary equation u = -T(h(u, W)) + x.

Given the disc component W and a base value x, the real part u of the
missing component G solves the fixed-point equation above on the circle;
the full boundary values are then ``u + i h(u, W)`` and G is their analytic
completion. The iteration is damped Picard; for graph manifolds in normal
form the map is a contraction at small disc scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .circle import CircleGrid, FourierSeries, fourier_analyze, hilbert_matrix
from .manifolds import CRGraphManifold, HoloPolyMap, evaluate_h_grid
from .quadric import DiscFamilyParams

#: default boundary-on-manifold residual required for a successful solve
BOUNDARY_TOL_DEFAULT = 1e-9


class BishopConvergenceError(RuntimeError):
    """Fixed-point iteration failed to converge; carries the last diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class DomainEscapeError(RuntimeError):
    """An iterate left the validity domain of the graph; no disc is returned."""


@dataclass(frozen=True)
class SolverParams:
    grid: CircleGrid = field(default_factory=CircleGrid)
    max_iterations: int = 200
    tolerance: float = 1e-11
    damping: float = 1.0
    boundary_tolerance: float = BOUNDARY_TOL_DEFAULT

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class DiscDiagnostics:
    boundary_residual: float
    center_residual: float
    analyticity_residual: float
    iterations: int
    converged: bool

    def __post_init__(self):
        for name in ("boundary_residual", "center_residual", "analyticity_residual"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class DiscFrame:
    """Chart data for discs solved in recentered coordinates.

    ``chart`` maps original ambient coordinates to the local frame in which
    the disc was solved; ``base_point`` is the (x, w) graph point at the
    chart origin, ``base_ambient`` its ambient image; ``local_manifold`` is
    the recentered graph.
    """

    base_point: tuple
    base_ambient: np.ndarray
    chart: HoloPolyMap
    local_manifold: CRGraphManifold


@dataclass(frozen=True)
class AttachedDisc:
    """A solved disc A = (G, W) with boundary on the manifold.

    ``G`` keeps the full analyzed spectrum; its negative-frequency content is
    the analyticity residual and stays below 1e-12 for converged solves.
    ``family`` records the generating parameters when the disc came from a
    polynomial family, and ``frame`` the chart when the solve happened in
    recentered coordinates (both needed for isotopies and center searches).
    """

    W: FourierSeries
    G: FourierSeries
    base_x: np.ndarray
    residuals: DiscDiagnostics
    family: Optional[DiscFamilyParams] = None
    frame: Optional[DiscFrame] = None

    @property
    def grid(self) -> CircleGrid:
        return self.G.grid

    def center(self) -> np.ndarray:
        g0 = self.G.analytic_part().coefficient(0)
        w0 = self.W.coefficient(0)
        return np.concatenate([g0, w0])

    def boundary_points(self, refine: int = 1) -> np.ndarray:
        """Boundary samples (G, W)(e^{i phi}) in the solve frame."""
        grid = self.grid if refine == 1 else self.grid.refine(refine)
        g = self.G.analytic_part().synthesize_on(grid)
        w = self.W.synthesize_on(grid)
        return np.hstack([g, w])

    def ambient_boundary(self, refine: int = 1) -> np.ndarray:
        """Boundary samples mapped back to the original ambient coordinates."""
        pts = self.boundary_points(refine)
        if self.frame is None:
            return pts
        chart = self.frame.chart
        out = np.empty_like(pts)
        guess = self.frame.base_ambient
        for i in range(pts.shape[0]):
            guess = chart.invert(pts[i], guess=guess)
            out[i] = guess
        return out

    def ambient_center(self) -> np.ndarray:
        c = self.center()
        if self.frame is None:
            return c
        return self.frame.chart.invert(c, guess=self.frame.base_ambient)

    def with_frame(self, frame: "DiscFrame") -> "AttachedDisc":
        return AttachedDisc(self.W, self.G, self.base_x, self.residuals, self.family, frame)


def _boundary_residual_on(m: CRGraphManifold, g_vals, w_vals) -> float:
    u = g_vals.real
    v = g_vals.imag
    h = evaluate_h_grid(m, u, w_vals)
    return float(np.abs(v - h).max())


def solve_bishop(
    m: CRGraphManifold,
    W: FourierSeries | DiscFamilyParams,
    x,
    params: SolverParams | None = None,
    u0: np.ndarray | None = None,
) -> AttachedDisc:
    """Solve the boundary equation and assemble the attached disc.

    ``W`` may be an analytic series or a disc family (whose modes are placed
    on the solver grid). Raises :class:`DomainEscapeError` when an iterate
    leaves the graph domain and :class:`BishopConvergenceError` when the
    iteration or the boundary residual fails the configured tolerances.
    """
    params = params or SolverParams()
    grid = params.grid
    family = None
    if isinstance(W, DiscFamilyParams):
        family = W
        w_series = W.w_series(grid)
    else:
        w_series = W
        if w_series.grid.size != grid.size:
            raise ValueError("W series lives on a different grid than the solver")
        if not w_series.is_analytic(1e-10):
            raise ValueError("W must be an analytic disc (no negative frequencies)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (m.d,):
        raise ValueError(f"base value must have dimension d={m.d}")

    w_bnd = w_series.synthesize()
    u_init = np.tile(x, (grid.size, 1)) if u0 is None else np.array(u0, dtype=float)
    if u_init.shape != (grid.size, m.d):
        raise ValueError("initial iterate has the wrong shape")

    coeffs, alphas, betas, gammas = m._term_arrays
    u, iterations, change, escaped = _kernels.picard_solve(
        m.quadric.matrices,
        coeffs,
        alphas,
        betas,
        gammas,
        w_bnd,
        x,
        u_init,
        hilbert_matrix(grid.size),
        params.damping,
        params.tolerance,
        params.max_iterations,
        m.domain_radius,
    )
    if escaped:
        raise DomainEscapeError(
            f"iterate left the graph domain (radius {m.domain_radius}) after "
            f"{iterations} iterations"
        )
    if change >= params.tolerance:
        raise BishopConvergenceError(
            f"no convergence in {params.max_iterations} iterations "
            f"(last sup-norm change {change:.3e})",
            diagnostics=DiscDiagnostics(np.inf, np.inf, np.inf, iterations, False),
        )

    h_bnd = evaluate_h_grid(m, u, w_bnd)
    g_series = fourier_analyze(u + 1j * h_bnd, grid)
    # constant-mode bookkeeping: pin Re G(0) to x exactly
    delta = x - g_series.coefficient(0).real
    g_series = g_series.shift_constant(delta.astype(complex))

    disc = AttachedDisc(w_series, g_series, x, _UNCHECKED, family)
    diags = disc_residual(disc, m, iterations=iterations, solver=params)
    disc = AttachedDisc(w_series, g_series, x, diags, family)
    if not diags.converged:
        raise BishopConvergenceError(
            f"boundary residual {diags.boundary_residual:.3e} exceeds "
            f"{params.boundary_tolerance:.1e} after {iterations} iterations",
            diagnostics=diags,
        )
    return disc


_UNCHECKED = DiscDiagnostics(0.0, 0.0, 0.0, 0, False)


def disc_center(disc: AttachedDisc) -> np.ndarray:
    """(G(0), W(0)) by series evaluation at the origin."""
    return disc.center()


def disc_residual(
    disc: AttachedDisc,
    m: CRGraphManifold,
    iterations: int | None = None,
    solver: SolverParams | None = None,
) -> DiscDiagnostics:
    """Recompute all residuals on a grid twice as fine as the solve grid.

    When ``solver`` is given its boundary tolerance decides the converged
    flag; otherwise the disc's stored flag is preserved.
    """
    fine = disc.grid.refine(2)
    g_fine = disc.G.analytic_part().synthesize_on(fine)
    w_fine = disc.W.synthesize_on(fine)
    boundary = _boundary_residual_on(m, g_fine, w_fine)
    center = float(np.abs(disc.G.coefficient(0).real - disc.base_x).max())
    analyticity = disc.G.negative_weight()
    its = disc.residuals.iterations if iterations is None else iterations
    if solver is None:
        converged = disc.residuals.converged
    else:
        converged = boundary <= solver.boundary_tolerance
    return DiscDiagnostics(boundary, center, analyticity, its, converged)


def solve_family(
    m: CRGraphManifold,
    family: DiscFamilyParams,
    params: SolverParams | None = None,
) -> AttachedDisc:
    """Convenience wrapper: solve the disc of a polynomial family at its base x."""
    return solve_bishop(m, family, family.x, params)
