"""Wedge coverage, thin-set avoidance, and holomorphic extension by discs.

Disc centers swept over base points and scale vectors fill a wedge
``{p + i eta : p in a patch of M, eta in a truncated cone of normal
directions}``. Through any certified wedge point one can find attached discs
whose boundaries clear a metrically thin singular set, shrink them to a
point through an isotopy, and evaluate the extension of a boundary function
at the center by the Cauchy mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bishop import (
    AttachedDisc,
    BishopConvergenceError,
    DiscFrame,
    DomainEscapeError,
    SolverParams,
    solve_bishop,
)
from .cones import ConeRegion
from .manifolds import CRGraphManifold, evaluate_h, normalize_at_point
from .oracles import OracleEvaluationError
from .quadric import DiscFamilyParams, closed_form_G, dv0_dt, v_center


class ThinSetError(ValueError):
    """Invalid thin-set data (dimension bound or component shapes)."""


class WedgeFitError(RuntimeError):
    """No truncated cone of normal directions could be certified."""


class AvoidanceError(RuntimeError):
    """Target point not reachable inside the certified parameter cone."""


@dataclass(frozen=True)
class ThinSetComponent:
    """Sampled piece of the singular set in graph coordinates, with a tube.

    ``dim`` declares the Hausdorff dimension of the underlying set: 0 for
    point clouds, the parameter dimension for sampled patches. The tube
    radius makes avoidance falsifiable in floating point: a boundary avoids
    the component when its distance to every sample exceeds the radius.
    """

    xs: np.ndarray
    ws: np.ndarray
    tube: float
    dim: int = 0

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ws = np.atleast_2d(np.asarray(self.ws, dtype=complex))
        if xs.shape[0] != ws.shape[0]:
            raise ThinSetError("component x and w sample counts differ")
        if self.tube < 0:
            raise ThinSetError("tube radius must be nonnegative")
        if self.dim < 0:
            raise ThinSetError("component dimension must be nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ws", ws)


@dataclass(frozen=True)
class ThinSet:
    """Union of tube components around low-dimensional subsets of M.

    The default dimension policy is the strict one: every component must
    have dimension strictly below ``2n - d - 2``. Passing
    ``allow_codim2_class=True`` relaxes the bound to ``<= 2n - d - 2``
    (enough for boundary-avoidance experiments, not for the full
    removability statement).
    """

    components: tuple
    n: int
    d: int
    allow_codim2_class: bool = False

    def __post_init__(self):
        comps = tuple(self.components)
        bound = 2 * self.n - self.d - 2
        for c in comps:
            if not isinstance(c, ThinSetComponent):
                raise ThinSetError("components must be ThinSetComponent instances")
            if c.xs.shape[1] != self.d or c.ws.shape[1] != self.n - self.d:
                raise ThinSetError("component samples do not match (d, n-d)")
            limit_ok = c.dim <= bound if self.allow_codim2_class else c.dim < bound
            if not limit_ok:
                cmp = "<=" if self.allow_codim2_class else "<"
                raise ThinSetError(
                    f"component of dimension {c.dim} violates the bound dim {cmp} "
                    f"2n-d-2 = {bound}"
                )
        object.__setattr__(self, "components", comps)

    @property
    def hausdorff_dim_bound(self) -> int:
        return max((c.dim for c in self.components), default=0)

    @classmethod
    def empty(cls, n: int, d: int) -> "ThinSet":
        return cls((), n, d)

    @classmethod
    def points(cls, n: int, d: int, xs, ws, tube: float, **kw) -> "ThinSet":
        return cls((ThinSetComponent(xs, ws, tube, dim=0),), n, d, **kw)

    @classmethod
    def from_patch(
        cls, n: int, d: int, param_fn, param_box, density: int, tube: float, **kw
    ) -> "ThinSet":
        """Sample a parametrized patch into a tube component.

        ``param_fn`` maps a parameter vector from the box (list of (lo, hi)
        intervals) to a graph point ``(x, w)``; the declared Hausdorff
        dimension is the box dimension and the tube radius must cover the
        sampling gaps.
        """
        axes = [np.linspace(lo, hi, density) for lo, hi in param_box]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        xs, ws = [], []
        for p in pts:
            x, w = param_fn(p)
            xs.append(np.asarray(x, dtype=float))
            ws.append(np.asarray(w, dtype=complex))
        comp = ThinSetComponent(np.array(xs), np.array(ws), tube, dim=len(param_box))
        return cls((comp,), n, d, **kw)

    def is_empty(self) -> bool:
        return len(self.components) == 0

    def raw_distance(self, x_pts: np.ndarray, w_pts: np.ndarray) -> float:
        """Min distance from the given graph points to any component sample."""
        best = np.inf
        for c in self.components:
            dx = x_pts[:, None, :] - c.xs[None, :, :]
            dw = w_pts[:, None, :] - c.ws[None, :, :]
            dist2 = np.sum(dx * dx, axis=2) + np.sum(np.abs(dw) ** 2, axis=2)
            best = min(best, float(np.sqrt(dist2.min())))
        return best

    def tube_distance(self, x_pts: np.ndarray, w_pts: np.ndarray) -> float:
        """Min over components of (distance to samples - tube radius)."""
        best = np.inf
        for c in self.components:
            dx = x_pts[:, None, :] - c.xs[None, :, :]
            dw = w_pts[:, None, :] - c.ws[None, :, :]
            dist2 = np.sum(dx * dx, axis=2) + np.sum(np.abs(dw) ** 2, axis=2)
            best = min(best, float(np.sqrt(dist2.min())) - c.tube)
        return best


@dataclass(frozen=True)
class WedgeCertificate:
    """Evidence that disc centers fill a wedge over an edge patch."""

    edge_center: tuple
    edge_radius: float
    cone: ConeRegion
    bases: tuple = field(repr=False, default=())
    etas: np.ndarray | None = field(repr=False, default=None)
    centers: np.ndarray | None = field(repr=False, default=None)
    excluded_nodes: tuple = ()

    def decompose(self, m: CRGraphManifold, z_ambient) -> tuple:
        return wedge_decompose(m, z_ambient)

    def contains(self, m: CRGraphManifold, z_ambient, angle_slack: float = 1e-9) -> bool:
        _, _, eta = wedge_decompose(m, z_ambient)
        return self.cone.contains(eta, angle_slack=angle_slack)


def wedge_decompose(m: CRGraphManifold, z_ambient) -> tuple:
    """Split an ambient point as (graph point, normal displacement).

    Returns ``(x_p, w_p, eta)`` with ``z = embed(x_p, w_p) + (i eta, 0)``;
    the identity is exact by construction.
    """
    z = np.asarray(z_ambient, dtype=complex).reshape(m.n)
    x_p = z[: m.d].real.copy()
    w_p = z[m.d :].copy()
    eta = z[: m.d].imag - evaluate_h(m, x_p, w_p)
    return x_p, w_p, eta


def _local_frame(m: CRGraphManifold, x_p, w_p) -> Optional[DiscFrame]:
    """Recentred frame at (x_p, w_p); None when p is already the origin."""
    x_p = np.asarray(x_p, dtype=float).reshape(m.d)
    w_p = np.asarray(w_p, dtype=complex).reshape(m.m)
    if np.abs(x_p).max(initial=0.0) == 0.0 and np.abs(w_p).max(initial=0.0) == 0.0:
        return None
    chart, local = normalize_at_point(m, (x_p, w_p))
    return DiscFrame((x_p, w_p), m.embed(x_p, w_p), chart, local)


def _solve_in_frame(
    m: CRGraphManifold,
    frame: Optional[DiscFrame],
    params: DiscFamilyParams,
    solver: SolverParams,
) -> AttachedDisc:
    target = m if frame is None else frame.local_manifold
    disc = solve_bishop(target, params, params.x, solver)
    return disc if frame is None else disc.with_frame(frame)


def sweep_centers(
    m: CRGraphManifold,
    params: DiscFamilyParams,
    omega: ConeRegion,
    base_grid,
    t_grid,
    solver: SolverParams | None = None,
    cover_rtol: float = 0.2,
    rays: int = 24,
    ladder: int = 8,
) -> WedgeCertificate:
    """Solve discs over base points and scales; fit the filled normal cone.

    ``base_grid`` holds (x, w) graph points of the edge patch; ``t_grid``
    scale vectors from the certified cone. Solver failures exclude the node
    and are reported on the certificate. Raises :class:`WedgeFitError` when
    the collected normal displacements span no truncated cone.
    """
    solver = solver or SolverParams()
    bases, etas, centers, excluded = [], [], [], []
    for bi, (bx, bw) in enumerate(base_grid):
        try:
            frame = _local_frame(m, bx, bw)
        except ValueError as exc:
            excluded.append((bi, None, str(exc)))
            continue
        for ti, t in enumerate(t_grid):
            t = np.asarray(t, dtype=float)
            if not omega.contains(t, angle_slack=1e-9):
                excluded.append((bi, ti, "scale vector outside certified cone"))
                continue
            pr = params.with_scales(t)
            try:
                disc = _solve_in_frame(m, frame, pr, solver)
            except (BishopConvergenceError, DomainEscapeError) as exc:
                excluded.append((bi, ti, str(exc)))
                continue
            center = disc.ambient_center()
            x_p, w_p, eta = wedge_decompose(m, center)
            bases.append((np.asarray(bx, dtype=float), np.asarray(bw, dtype=complex)))
            etas.append(eta)
            centers.append(center)
    if not etas:
        raise WedgeFitError("no disc centers available to fit a cone")
    etas_arr = np.array(etas)
    centers_arr = np.array(centers)
    cone = _fit_center_cone(etas_arr, cover_rtol, rays, ladder)
    base_norms = [
        float(np.sqrt(np.sum(np.square(b[0])) + np.sum(np.abs(b[1]) ** 2)))
        for b in bases
    ]
    mean_x = np.mean([b[0] for b in bases], axis=0)
    mean_w = np.mean([b[1] for b in bases], axis=0)
    return WedgeCertificate(
        edge_center=(mean_x, mean_w),
        edge_radius=max(base_norms),
        cone=cone,
        bases=tuple(bases),
        etas=etas_arr,
        centers=centers_arr,
        excluded_nodes=tuple(excluded),
    )


def _fit_center_cone(etas: np.ndarray, cover_rtol: float, rays: int, ladder: int) -> ConeRegion:
    """Largest truncated cone whose rays are covered at every sampled scale.

    Rung scales sit at the empirical quantiles of the evidence norms; a ray
    is covered at scale s when some center displacement lies within
    ``cover_rtol * s`` of the ray point. The half-angle is bisected for the
    coverage requirement; if the full ladder is not coverable at any angle,
    the top rungs are trimmed (the certified scale shrinks accordingly).
    """
    norms = np.linalg.norm(etas, axis=1)
    keep = norms > 1e-12
    if not keep.any():
        raise WedgeFitError("all disc centers lie on the manifold (no normal displacement)")
    etas = etas[keep]
    norms = norms[keep]
    mean = etas.mean(axis=0)
    if np.linalg.norm(mean) < 1e-12:
        raise WedgeFitError("normal displacements average to zero; no cone direction")
    axis = mean / np.linalg.norm(mean)
    rungs = np.quantile(norms, np.linspace(0.05, 0.98, ladder))
    d = etas.shape[1]

    def all_covered(theta: float, rung_set) -> bool:
        probe = ConeRegion(axis, theta, float(rung_set[-1]))
        dirs = probe.sample_rays(rays, np.random.default_rng(2024))
        for u in dirs:
            for s in rung_set:
                gap = np.linalg.norm(etas - (s * u)[None, :], axis=1).min()
                if gap > cover_rtol * s:
                    return False
        return True

    min_rungs = min(3, ladder)
    for top in range(ladder, min_rungs - 1, -1):
        rung_set = rungs[:top]
        if d == 1:
            if all_covered(np.pi / 4, rung_set):
                return ConeRegion(axis, np.pi / 4, float(rung_set[-1]))
            continue
        theta_min = 1e-3
        if not all_covered(theta_min, rung_set):
            continue
        lo, hi = theta_min, np.pi / 2 * 0.98
        for _ in range(10):
            mid = 0.5 * (lo + hi)
            if all_covered(mid, rung_set):
                lo = mid
            else:
                hi = mid
        return ConeRegion(axis, lo, float(rung_set[-1]))
    raise WedgeFitError("center evidence covers no truncated cone of normal directions")


@dataclass(frozen=True)
class AvoidanceResult:
    success: bool
    disc: Optional[AttachedDisc] = None
    clearance: float = -np.inf
    raw_distance: float = -np.inf
    attempts: int = 0
    scales: Optional[np.ndarray] = None
    best_clearance: float = -np.inf


def _center_height(
    m_loc: CRGraphManifold, params: DiscFamilyParams, solver: SolverParams
):
    """v(t, 0) and its t-Jacobian; closed form for quadrics, FD otherwise."""
    pure = len(m_loc.perturbation) == 0
    q = m_loc.quadric

    if pure:

        def value(t):
            return v_center(q, params.with_scales(t))

        def jacobian(t):
            pr = params.with_scales(t)
            return np.stack(
                [dv0_dt(q, pr, j) for j in range(1, params.N + 1)], axis=1
            )

    else:

        def value(t):
            disc = solve_bishop(m_loc, params.with_scales(t), params.x, solver)
            return disc.G.coefficient(0).imag

        def jacobian(t, step=1e-6):
            cols = []
            for j in range(params.N):
                tp = t.copy()
                tp[j] += step
                tm = t.copy()
                tm[j] -= step
                cols.append((value(tp) - value(tm)) / (2 * step))
            return np.stack(cols, axis=1)

    return value, jacobian


def _newton_to_level(
    value, jacobian, eta, omega: ConeRegion, t0=None, max_iter: int = 80, tol: float = 1e-12
) -> np.ndarray:
    """Least-norm Newton for v(t,0) = eta restricted to the cone.

    The center height of a disc family is quadratic-dominated, so the first
    iterate is radially prescaled onto the right magnitude; the Newton steps
    then stay interior and converge fast. A stall above 10x the tolerance is
    an error (callers rely on the center hitting the target to near machine
    precision).
    """
    t = omega.retract(0.5 * omega.scale_max * omega.axis if t0 is None else t0)
    scale = max(1.0, float(np.linalg.norm(eta)))
    v = value(t)
    vn = np.linalg.norm(v)
    if vn > 0:
        ratio = np.linalg.norm(eta) / vn
        if 0.0 < ratio and abs(ratio - 1.0) > 1e-12:
            t = omega.retract(np.sqrt(ratio) * t)
    for _ in range(max_iter):
        r = value(t) - eta
        if np.abs(r).max() < tol * scale:
            return t
        J = jacobian(t)
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        tn = t + step
        if not omega.contains(tn, angle_slack=1e-9):
            tn = omega.retract(tn)
        t = tn
    r = value(t) - eta
    if np.abs(r).max() < 10.0 * tol * scale:
        return t
    raise AvoidanceError(
        f"no scale vector in the cone reaches the normal level (residual {np.abs(r).max():.3e})"
    )


def _tangential_sample(rng, t, jacobian, omega: ConeRegion, step_frac: float):
    """Random move along the level-set tangent directions, then retract."""
    J = jacobian(t)
    _, _, vh = np.linalg.svd(J, full_matrices=True)
    null = vh[J.shape[0] :, :]  # rows span ker J
    if null.shape[0] == 0:
        return t
    coef = rng.standard_normal(null.shape[0])
    direction = coef @ null
    nrm = np.linalg.norm(direction)
    if nrm < 1e-14:
        return t
    cand = t + step_frac * np.linalg.norm(t) * direction / nrm
    return omega.retract(cand)


def _boundary_graph_coords(disc: AttachedDisc, refine: int = 1):
    pts = disc.ambient_boundary(refine)
    d = disc.base_x.shape[0]
    return pts[:, :d].real, pts[:, d:]


def find_avoiding_disc(
    m: CRGraphManifold,
    K: ThinSet,
    z_ambient,
    params: DiscFamilyParams,
    omega: ConeRegion,
    budget: int = 60,
    seed: int = 0,
    clearance_floor: float = 0.0,
    solver: SolverParams | None = None,
    step_frac: float = 0.35,
) -> AvoidanceResult:
    """Search for a disc through z whose boundary clears the thin set.

    The target's normal component pins the level set ``{t : v(t,0) = eta}``;
    Newton reaches it inside the cone and seeded tangential moves explore it
    until a boundary keeps ``tube_distance >= clearance_floor``. Returns a
    failure result with the best clearance when the budget runs out.
    """
    solver = solver or SolverParams()
    rng = np.random.default_rng(seed)
    x_p, w_p, eta = wedge_decompose(m, z_ambient)
    if np.linalg.norm(eta) < 1e-14:
        raise AvoidanceError("target point lies on the manifold, not in the wedge")
    frame = _local_frame(m, x_p, w_p)
    if frame is None:
        m_loc = m
        eta_loc = eta
        x_loc = np.zeros(m.d)
    else:
        m_loc = frame.local_manifold
        z_loc = frame.chart.apply(np.asarray(z_ambient, dtype=complex))
        x_loc = z_loc[: m.d].real
        eta_loc = z_loc[: m.d].imag - evaluate_h(m_loc, x_loc, z_loc[m.d :])
    base = params.with_x(x_loc)
    value, jacobian = _center_height(m_loc, base, solver)
    t_star = _newton_to_level(value, jacobian, eta_loc, omega)

    def resample(t_from):
        for _ in range(8):
            cand = _tangential_sample(rng, t_from, jacobian, omega, step_frac)
            try:
                return _newton_to_level(value, jacobian, eta_loc, omega, t0=cand)
            except AvoidanceError:
                continue
        return t_star

    best = AvoidanceResult(False, attempts=0)
    t = t_star
    for attempt in range(1, budget + 1):
        pr = base.with_scales(t)
        try:
            disc = _solve_in_frame(m, frame, pr, solver)
        except (BishopConvergenceError, DomainEscapeError):
            t = resample(t_star)
            continue
        xs, ws = _boundary_graph_coords(disc, refine=2)
        tube_dist = K.tube_distance(xs, ws) if not K.is_empty() else np.inf
        raw = K.raw_distance(xs, ws) if not K.is_empty() else np.inf
        if tube_dist > best.best_clearance:
            best = AvoidanceResult(
                False,
                disc=disc,
                clearance=tube_dist,
                raw_distance=raw,
                attempts=attempt,
                scales=t.copy(),
                best_clearance=tube_dist,
            )
        if tube_dist >= clearance_floor and tube_dist > 0.0:
            return AvoidanceResult(
                True, disc, tube_dist, raw, attempt, t.copy(), tube_dist
            )
        t = resample(t)
    return best


def isotopy_path(
    m: CRGraphManifold,
    K: ThinSet,
    disc: AttachedDisc,
    steps: int = 20,
    solver: SolverParams | None = None,
    clearance: str = "raw",
) -> list:
    """Shrink a disc to its base point through discs avoiding the thin set.

    Scales follow ``s t`` for s from 1 to 0. Every solved step with s > 0
    must keep its boundary clear of K; the returned family ends with the
    s = 0 constant disc at the base point, which is the limit object and is
    not subjected to the clearance check.

    With ``clearance="raw"`` (default) the check is a strictly positive
    distance to the K samples, which stays meaningful even when the target
    sits vertically above a singular point. ``clearance="tube"`` demands
    positive distance to the tube instead and additionally requires the base
    point itself to clear the tube before any solve.
    """
    if disc.family is None:
        raise ValueError("disc carries no family parameters; cannot shrink it")
    if clearance not in ("raw", "tube"):
        raise ValueError("clearance mode must be 'raw' or 'tube'")
    solver = solver or SolverParams(grid=disc.grid)
    frame = disc.frame
    m_loc = m if frame is None else frame.local_manifold
    base = disc.family
    # the base point of the isotopy in original coordinates
    if frame is None:
        p_x, p_w = base.x, base.t0 * base.a0
    else:
        p_x, p_w = frame.base_point
    if clearance == "tube" and not K.is_empty():
        p_dist = K.tube_distance(
            np.atleast_2d(np.asarray(p_x, dtype=float)),
            np.atleast_2d(np.asarray(p_w, dtype=complex)),
        )
        if p_dist <= 0.0:
            raise AvoidanceError("isotopy base point lies inside the thin-set tube")
    path = []
    for i, s in enumerate(np.linspace(1.0, 0.0, steps + 1)):
        pr = base.with_scales(s * base.scales)
        step_disc = solve_bishop(m_loc, pr, pr.x, solver)
        if frame is not None:
            step_disc = step_disc.with_frame(frame)
        if s > 0.0 and not K.is_empty():
            xs, ws = _boundary_graph_coords(step_disc, refine=2)
            gap = K.raw_distance(xs, ws) if clearance == "raw" else K.tube_distance(xs, ws)
            if gap <= 0.0:
                raise AvoidanceError(
                    f"isotopy step {i} (s = {s:.3f}) violates clearance ({gap:.3e})"
                )
        path.append(step_disc)
    return path


def cauchy_extend(f: Callable, disc: AttachedDisc) -> complex:
    """Extension value at the disc center: the mean of boundary values.

    For f the restriction of a function holomorphic near the boundary, the
    composite is analytic on the closed disc and the mean over the circle is
    its value at zero, i.e. at the disc center.
    """
    pts = disc.ambient_boundary()
    try:
        vals = f(pts)
    except OracleEvaluationError:
        raise
    except Exception as exc:  # noqa: BLE001 - report the offending sample
        raise OracleEvaluationError(f"boundary oracle evaluation failed: {exc}") from exc
    vals = np.asarray(vals, dtype=complex)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = int(np.argmax(bad))
        phi = 2 * np.pi * idx / pts.shape[0]
        raise OracleEvaluationError(
            f"oracle returned a non-finite value at phi = {phi:.4f}", sample_index=idx
        )
    return complex(vals.mean())


@dataclass(frozen=True)
class ConsistencyReport:
    values: tuple
    max_deviation: float
    passed: bool
    tolerance: float
    discs_found: int


def consistency_check(
    f: Callable,
    m: CRGraphManifold,
    K: ThinSet,
    z_ambient,
    params: DiscFamilyParams,
    omega: ConeRegion,
    trials: int = 6,
    seed: int = 0,
    tolerance: float = 1e-6,
    solver: SolverParams | None = None,
    budget: int = 40,
) -> ConsistencyReport:
    """Extension values from distinct discs through z must agree.

    Each trial rotates the family directions by a unit phase (which leaves
    the reachable centers unchanged) and reruns the avoiding-disc search; at
    least two successes are required.
    """
    rng = np.random.default_rng(seed)
    values = []
    for trial in range(trials):
        phase = np.exp(2j * np.pi * (trial / trials + 0.01 * rng.uniform()))
        pr = params.with_directions(params.directions * phase)
        res = find_avoiding_disc(
            m, K, z_ambient, pr, omega, budget=budget, seed=seed + 17 * trial,
            solver=solver,
        )
        if res.success:
            values.append(cauchy_extend(f, res.disc))
    if len(values) < 2:
        raise AvoidanceError(
            f"only {len(values)} avoiding discs found through the target; need >= 2"
        )
    arr = np.array(values)
    dev = float(np.abs(arr[:, None] - arr[None, :]).max())
    return ConsistencyReport(tuple(values), dev, dev < tolerance, tolerance, len(values))


@dataclass(frozen=True)
class ThinnessScan:
    radii: tuple
    hit_fractions: tuple
    samples: int
    monotone: bool


def thinness_scan(
    m: CRGraphManifold,
    K_points,
    eta,
    params: DiscFamilyParams,
    omega: ConeRegion,
    samples: int = 10_000,
    radii=(0.1, 0.03, 0.01, 0.003),
    seed: int = 0,
    solver: SolverParams | None = None,
) -> ThinnessScan:
    """Fraction of level-set parameters whose boundary hits a shrinking tube.

    Draws scale vectors on ``{v(t,0) = eta}`` inside the cone (random rays
    radially corrected onto the level set) and counts, for each tube radius,
    how often the disc boundary comes closer than the radius to the sampled
    point cloud. The fractions must decay as the tube shrinks when the cloud
    is metrically thin.
    """
    solver = solver or SolverParams()
    rng = np.random.default_rng(seed)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    xs_k = np.atleast_2d(np.asarray(K_points[0], dtype=float))
    ws_k = np.atleast_2d(np.asarray(K_points[1], dtype=complex))
    if len(m.perturbation) != 0:
        raise ValueError("the thinness scan uses the closed-form quadric center map")
    q = m.quadric
    value, jacobian = _center_height(m, params, solver)
    radii = tuple(sorted(radii, reverse=True))
    angles = solver.grid.angles
    hits = np.zeros(len(radii), dtype=int)
    drawn = 0
    tries = 0
    while drawn < samples:
        tries += 1
        if tries > 50 * samples:
            raise AvoidanceError("level-set sampler rejects almost all cone rays")
        u = omega.sample_rays(1, rng)[0]
        vu = v_center(q, params.with_scales(u))
        if np.linalg.norm(vu) < 1e-14:
            continue
        if m.d == 1:
            s2 = eta[0] / vu[0]
            if s2 <= 0:
                continue
            t = np.sqrt(s2) * u
        else:
            scale0 = np.sqrt(np.linalg.norm(eta) / np.linalg.norm(vu))
            try:
                t = _newton_to_level(value, jacobian, eta, omega, t0=scale0 * u)
            except AvoidanceError:
                continue
        if not omega.contains(t, angle_slack=0.2):
            continue
        drawn += 1
        pr = params.with_scales(t)
        wb = pr.w_boundary(angles)
        g = closed_form_G(q, pr, solver.grid).synthesize()
        dx = g.real[:, None, :] - xs_k[None, :, :]
        dw = wb[:, None, :] - ws_k[None, :, :]
        dmin = np.sqrt((np.sum(dx * dx, axis=2) + np.sum(np.abs(dw) ** 2, axis=2)).min())
        for ri, r in enumerate(radii):
            if dmin < r:
                hits[ri] += 1
    fractions = tuple(float(h) / samples for h in hits)
    monotone = all(fractions[i] >= fractions[i + 1] for i in range(len(radii) - 1))
    return ThinnessScan(radii, fractions, samples, monotone)
