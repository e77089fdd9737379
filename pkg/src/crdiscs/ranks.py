"""Derivative matrices of disc families and maximal-rank certificates.

The boundary map of a polynomial disc family sends the scale vector t to
``(W, conj W, Re G, v(0))``; its derivative in t at fixed ``zeta`` on the
circle is assembled here in two variants:

* ``M``: rows ``(a_j zeta^j, conj, d Re G/d t_j, 2 t_j q(a_j, abar_j))``
  with the exact closed-form derivative of Re G;
* ``Mprime``: the row-reduced variant with the pure-imaginary polynomial row
  ``P_j = 2 sum_{k<j} t_k (q(a_j, abar_k) zeta^(j-k) - q(a_k, abar_j)
  zeta^(k-j))`` and ``t_j q(a_j, abar_j)``.

The variants have equal rank: adding the fixed linear images
``i q(col_W, conj W(zeta))`` and ``-i q(W(zeta), col_Wbar)`` of the W-rows
to the Re G row produces the P row up to a constant factor, and the
``t_k`` factor inside P is exactly what makes that reduction valid.
Maximal rank ``2n`` is computed over the reals after collapsing the
conjugate row pair into real and imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bishop import (
    BishopConvergenceError,
    DomainEscapeError,
    SolverParams,
    solve_bishop,
)
from .cones import ConeRegion
from .manifolds import CRGraphManifold, QuadricForm, quadric_hull_report
from .quadric import DiscFamilyParams, dReG_dt

__all__ = [
    "RankMatrix",
    "ConeRegion",
    "RankSearchResult",
    "PatchVerificationError",
    "SubmersionNodeError",
    "SubmersionReport",
    "build_P",
    "build_matrix",
    "numerical_rank",
    "ranks_on_circle",
    "realified_stack",
    "search_max_rank_at",
    "patch_over_circle",
    "verify_submersion",
]

RANK_TOL_DEFAULT = 1e-8


@dataclass(frozen=True)
class RankMatrix:
    """Derivative matrix at one circle point, complex and realified forms."""

    complex_matrix: np.ndarray
    realified: np.ndarray
    zeta: complex
    variant: str
    params: Optional[DiscFamilyParams] = None

    @property
    def shape(self):
        return self.realified.shape


class PatchVerificationError(RuntimeError):
    """Circle-wide rank verification failed; carries the worst node."""

    def __init__(self, message, worst_zeta=None, achieved_rank=None):
        super().__init__(message)
        self.worst_zeta = worst_zeta
        self.achieved_rank = achieved_rank


class SubmersionNodeError(RuntimeError):
    """The disc solver failed at a verification grid node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


def _check_unit(zeta) -> complex:
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-9:
        raise ValueError(f"zeta must lie on the unit circle, |zeta| = {abs(zeta):.6f}")
    return zeta


def build_P(q: QuadricForm, directions, scales, j: int, zeta, base=None) -> np.ndarray:
    """Pure-imaginary polynomial row entry P_j(a, zeta, t).

    ``base``, when given as ``(a0, t0)``, contributes the k = 0 term of the
    sum; the bare form starts at k = 1.
    """
    zeta = _check_unit(zeta)
    dirs = np.atleast_2d(np.asarray(directions, dtype=complex))
    t = np.atleast_1d(np.asarray(scales, dtype=float))
    if base is not None:
        a0, t0 = base
        dirs = np.vstack([np.asarray(a0, dtype=complex)[None, :], dirs])
        t = np.concatenate([[float(t0)], t])
    else:
        dirs = np.vstack([np.zeros((1, dirs.shape[1]), dtype=complex), dirs])
        t = np.concatenate([[0.0], t])
    N = t.shape[0] - 1
    if not 1 <= j <= N:
        raise ValueError(f"column index {j} outside 1..{N}")
    out = np.zeros(q.d, dtype=complex)
    for k in range(j):
        cross = q(dirs[j], np.conj(dirs[k])) * zeta ** (j - k)
        out += 2.0 * t[k] * (cross - np.conj(cross))
    return out


def _pair_table(q: QuadricForm, params: DiscFamilyParams) -> np.ndarray:
    """Q[p, q] = q(a_p, conj a_q) over the full index range 0..N."""
    a = params.full_directions
    return np.einsum("ljk,pj,qk->pql", q.matrices, a, np.conj(a))


def realified_stack(
    q: QuadricForm, params: DiscFamilyParams, zetas, variant: str = "Mprime"
) -> np.ndarray:
    """Realified derivative matrices for a whole batch of circle points.

    Returns shape ``(Z, 2n, N)``; row blocks are (Re W, Im W, boundary row,
    center row). Vectorized over zeta so circle-wide verification can use
    one batched SVD.
    """
    if variant not in ("M", "Mprime"):
        raise ValueError(f"variant must be 'M' or 'Mprime', got {variant!r}")
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    if np.abs(np.abs(zetas) - 1.0).max() > 1e-9:
        raise ValueError("all zetas must lie on the unit circle")
    N, mdim, d = params.N, params.m, params.d
    t = params.full_scales
    a = params.full_directions
    Q = _pair_table(q, params)
    Z = zetas.shape[0]
    full = 2 * (mdim + d)
    out = np.zeros((Z, full, N))
    zpow = zetas[:, None] ** np.arange(N + 1)[None, :]  # (Z, N+1)
    for j in range(1, N + 1):
        wcol = a[j][None, :] * zpow[:, j][:, None]
        out[:, :mdim, j - 1] = wcol.real
        out[:, mdim : 2 * mdim, j - 1] = wcol.imag
        # s1(z) = sum_{k<j} t_k Q[j,k] z^(j-k);  s2(z) = sum_{k>j} t_k Q[k,j] z^(k-j)
        s1 = np.zeros((Z, d), dtype=complex)
        for k in range(j):
            if t[k] != 0.0:
                s1 += t[k] * Q[j, k][None, :] * zpow[:, j - k][:, None]
        if variant == "Mprime":
            out[:, 2 * mdim : 2 * mdim + d, j - 1] = 4.0 * s1.imag
            out[:, 2 * mdim + d :, j - 1] = t[j] * Q[j, j].real[None, :]
        else:
            s2 = np.zeros((Z, d), dtype=complex)
            for k in range(j + 1, N + 1):
                if t[k] != 0.0:
                    s2 += t[k] * Q[k, j][None, :] * zpow[:, k - j][:, None]
            out[:, 2 * mdim : 2 * mdim + d, j - 1] = -2.0 * s1.imag - 2.0 * s2.imag
            out[:, 2 * mdim + d :, j - 1] = 2.0 * t[j] * Q[j, j].real[None, :]
    return out


def ranks_on_circle(
    q: QuadricForm,
    params: DiscFamilyParams,
    zetas,
    tol: float = RANK_TOL_DEFAULT,
    variant: str = "Mprime",
) -> np.ndarray:
    """Numerical rank of the realified matrix at each circle point (batched)."""
    stack = realified_stack(q, params, zetas, variant)
    s = np.linalg.svd(stack, compute_uv=False)
    lead = s[:, :1]
    safe = np.where(lead > 0.0, lead, 1.0)
    return np.sum((s > tol * safe) & (lead > 0.0), axis=1)


def build_matrix(
    q: QuadricForm, params: DiscFamilyParams, zeta, variant: str = "Mprime"
) -> RankMatrix:
    """Assemble the derivative matrix at ``zeta`` in the given variant."""
    zeta = _check_unit(zeta)
    if variant not in ("M", "Mprime"):
        raise ValueError(f"variant must be 'M' or 'Mprime', got {variant!r}")
    N, mdim, d = params.N, params.m, params.d
    a = params.directions
    t = params.scales
    n = mdim + d
    cm = np.zeros((2 * n, N), dtype=complex)
    base = (params.a0, params.t0)
    for j in range(1, N + 1):
        wcol = a[j - 1] * zeta ** j
        cm[:mdim, j - 1] = wcol
        cm[mdim : 2 * mdim, j - 1] = np.conj(wcol)
        if variant == "M":
            row3 = dReG_dt(q, params, j, zeta).astype(complex)
            row4 = 2.0 * t[j - 1] * q(a[j - 1])
        else:
            row3 = build_P(q, a, t, j, zeta, base=base)
            row4 = t[j - 1] * q(a[j - 1])
            if np.abs(row3.real).max(initial=0.0) > 1e-10 * max(1.0, np.abs(row3).max(initial=0.0)):
                raise AssertionError("P row is not purely imaginary")
        cm[2 * mdim : 2 * mdim + d, j - 1] = row3
        cm[2 * mdim + d :, j - 1] = row4
    rm = realified_stack(q, params, np.array([zeta]), variant)[0]
    return RankMatrix(cm, rm, zeta, variant, params)


def numerical_rank(mat, tol: float = RANK_TOL_DEFAULT) -> int:
    """Count of singular values of the realified matrix above tol * max."""
    if not 0.0 < tol < 1.0:
        raise ValueError("tolerance must lie in (0, 1)")
    arr = mat.realified if isinstance(mat, RankMatrix) else np.asarray(mat, dtype=float)
    if arr.size == 0:
        raise ValueError("empty matrix has no rank")
    s = np.linalg.svd(arr, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class RankSearchResult:
    success: bool
    N: int = 0
    directions: Optional[np.ndarray] = None
    scales: Optional[np.ndarray] = None
    rank: int = 0
    attempts: int = 0
    reason: str = ""
    d: int = 1

    def as_params(self, x=None, family_radius: float = 10.0) -> DiscFamilyParams:
        if not self.success:
            raise ValueError("search failed; no parameters available")
        x = np.zeros(self.d) if x is None else x
        return DiscFamilyParams(
            x, self.directions, self.scales, family_radius=family_radius
        )


def search_max_rank_at(
    q: QuadricForm,
    zeta,
    budget: int = 10000,
    seed: int = 0,
    rank_tol: float = RANK_TOL_DEFAULT,
    hull_samples: int = 4096,
) -> RankSearchResult:
    """Greedy randomized search for scales/directions of maximal rank 2n.

    Columns are appended one frequency at a time and kept only when the
    numerical rank of the realified matrix increases, mirroring the
    one-covector-at-a-time elimination that proves existence. Proposals
    alternate fresh random directions with ``i`` times the last accepted one
    (the rotation that separates the mixed-term rows). Requires the convex
    hull of the quadric image to have nonempty interior; otherwise the
    center row can never span the normal directions and the search reports
    failure immediately.
    """
    zeta = _check_unit(zeta)
    d, mdim = q.d, q.m
    full = 2 * (d + mdim)
    hull = quadric_hull_report(q, sample_count=hull_samples, seed=seed)
    if not hull.hull_has_interior:
        return RankSearchResult(
            False, reason="convex hull of the quadric image has empty interior", d=d
        )
    rng = np.random.default_rng(seed)
    dirs: list = []
    scales: list = []
    rank = 0
    attempts = 0
    last_kept = None
    while attempts < budget:
        attempts += 1
        if last_kept is not None and attempts % 3 == 0:
            cand = 1j * last_kept
        else:
            cand = rng.standard_normal(mdim) + 1j * rng.standard_normal(mdim)
            cand /= np.linalg.norm(cand)
        t_new = rng.uniform(0.3, 1.0)
        trial_dirs = np.array(dirs + [cand])
        trial_scales = np.array(scales + [t_new])
        params = DiscFamilyParams(
            np.zeros(d), trial_dirs, trial_scales, family_radius=10.0
        )
        mat = build_matrix(q, params, zeta, "Mprime")
        r = numerical_rank(mat, rank_tol)
        if r > rank:
            dirs.append(cand)
            scales.append(t_new)
            rank = r
            last_kept = cand
            if rank == full:
                return RankSearchResult(
                    True, len(dirs), np.array(dirs), np.array(scales), rank, attempts, d=d
                )
    return RankSearchResult(
        False,
        len(dirs),
        np.array(dirs) if dirs else None,
        np.array(scales) if scales else None,
        rank,
        attempts,
        reason=f"budget exhausted at rank {rank} < {full}",
        d=d,
    )


def patch_over_circle(
    q: QuadricForm,
    circle_samples: int = 8,
    scale_ladder: float = 5.0,
    seed: int = 0,
    budget_per_point: int = 10000,
    verify_points: int = 720,
    rank_tol: float = RANK_TOL_DEFAULT,
    sup_w_bound: float = 0.25,
    cone_rays: int = 32,
) -> tuple:
    """Concatenate per-point maximal-rank families into a circle-wide one.

    Runs the greedy search at ``circle_samples`` points of the circle,
    concatenates the solutions with a geometric scale ladder (later blocks
    ``scale_ladder`` times heavier, so each block dominates the polynomial
    pollution of the earlier ones), then verifies rank 2n on a fine
    ``verify_points`` grid and fits a truncated cone of scale vectors around
    the concatenated representative. Returns ``(params, cone)``; raises
    :class:`PatchVerificationError` when the fine-grid check fails.
    """
    d, mdim = q.d, q.m
    full = 2 * (d + mdim)
    blocks = []
    for mth in range(circle_samples):
        zeta_m = np.exp(2j * np.pi * mth / circle_samples)
        res = search_max_rank_at(q, zeta_m, budget=budget_per_point, seed=seed + 1000 * mth)
        if not res.success:
            raise PatchVerificationError(
                f"rank search failed at circle sample {mth}: {res.reason}",
                worst_zeta=zeta_m,
                achieved_rank=res.rank,
            )
        blocks.append(res)
    dirs = np.vstack([b.directions for b in blocks])
    scales = np.concatenate(
        [scale_ladder**i * b.scales for i, b in enumerate(blocks)]
    )
    scales = scales / np.linalg.norm(scales)
    axis = scales.copy()
    weight = float(np.linalg.norm(np.linalg.norm(dirs, axis=1)))
    scale_max = sup_w_bound / weight
    params = DiscFamilyParams(
        np.zeros(d), dirs, scales * scale_max * 0.5, family_radius=10.0
    )

    zetas = np.exp(2j * np.pi * np.arange(verify_points) / verify_points)
    ranks = ranks_on_circle(q, params, zetas, rank_tol)
    if ranks.min() < full:
        i = int(np.argmin(ranks))
        raise PatchVerificationError(
            f"rank {int(ranks[i])} < {full} at zeta = {zetas[i]:.6f} on the fine grid",
            worst_zeta=zetas[i],
            achieved_rank=int(ranks[i]),
        )

    half = _fit_scale_cone(
        q, params, axis, zetas, full, rank_tol, cone_rays, seed
    )
    cone = ConeRegion(axis, half, scale_max)
    return params, cone


def _fit_scale_cone(q, params, axis, zetas, full, rank_tol, rays, seed, steps: int = 10):
    """Largest half-angle whose sampled rays all keep rank 2n on the circle."""
    check_zetas = zetas[:: max(1, len(zetas) // 90)]
    norm = np.linalg.norm(params.scales)

    def ray_ok(tvec) -> bool:
        pr = params.with_scales(tvec)
        return int(ranks_on_circle(q, pr, check_zetas, rank_tol).min()) == full

    lo, hi = 0.0, np.pi / 2 * 0.98
    best = None
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        probe = ConeRegion(axis, mid, 1.0)
        rng = np.random.default_rng(seed + 7)
        ok = all(ray_ok(u * norm) for u in probe.sample_rays(rays, rng))
        if ok:
            best = mid
            lo = mid
        else:
            hi = mid
    if best is None:
        best = 1e-2
    return best


def verify_submersion(
    m: CRGraphManifold,
    params: DiscFamilyParams,
    omega: ConeRegion,
    t_list,
    zeta_count: int = 32,
    x_list=None,
    solver: SolverParams | None = None,
    fd_step: float = 1e-5,
    sigma_floor: float = 1e-6,
    jobs: int = 1,
) -> "SubmersionReport":
    """Minimum needed singular value of the finite-difference disc Jacobian.

    For each base value x and scale vector t, the rows d(u)/dt_j and
    d(v(0))/dt_j are central finite differences of solved discs; the W rows
    are exact. The realified matrix is evaluated at ``zeta_count`` equally
    spaced circle points (a divisor of the solve grid) and the report passes
    when the smallest needed singular value stays above ``sigma_floor``.
    Nodes are independent, so ``jobs > 1`` fans them out over threads (the
    solver kernel releases the GIL); the reduction order is fixed, keeping
    reports deterministic.
    """
    solver = solver or SolverParams()
    grid = solver.grid
    if grid.size % zeta_count != 0:
        raise ValueError("zeta_count must divide the solver grid size")
    stride = grid.size // zeta_count
    sel = np.arange(0, grid.size, stride)
    zetas = np.exp(1j * grid.angles[sel])
    x_list = [params.x] if x_list is None else x_list
    d, mdim, N = params.d, params.m, params.N
    full = 2 * (d + mdim)
    if N < full:
        raise ValueError(f"family has {N} modes; need at least {full} for maximal rank")
    nodes = []
    for xi, x in enumerate(x_list):
        for ti, t in enumerate(t_list):
            t = np.asarray(t, dtype=float)
            if not omega.contains(t, angle_slack=1e-9):
                raise ValueError(f"scale vector at node ({xi}, {ti}) lies outside the cone")
            nodes.append((xi, ti, np.asarray(x, dtype=float), t))

    def node_sigmas(node):
        xi, ti, x, t = node
        du = np.empty((N, grid.size, d))
        dv0 = np.empty((N, d))
        for j in range(N):
            sols = []
            for sgn in (+1.0, -1.0):
                tj = t.copy()
                tj[j] += sgn * fd_step
                pr = params.with_scales(tj).with_x(x)
                try:
                    disc = solve_bishop(m, pr, pr.x, solver)
                except (BishopConvergenceError, DomainEscapeError) as exc:
                    raise SubmersionNodeError(
                        f"solver failed at node x index {xi}, t index {ti}, "
                        f"mode {j + 1}, sign {sgn:+.0f}: {exc}",
                        node=(xi, ti, j, sgn),
                    ) from exc
                sols.append(disc)
            up = sols[0].G.analytic_part().synthesize().real
            um = sols[1].G.analytic_part().synthesize().real
            du[j] = (up - um) / (2.0 * fd_step)
            v0p = sols[0].G.coefficient(0).imag
            v0m = sols[1].G.coefficient(0).imag
            dv0[j] = (v0p - v0m) / (2.0 * fd_step)
        a = params.directions
        mats = np.zeros((zetas.shape[0], full, N))
        for j in range(1, N + 1):
            wcols = a[j - 1][None, :] * zetas[:, None] ** j
            mats[:, :mdim, j - 1] = wcols.real
            mats[:, mdim : 2 * mdim, j - 1] = wcols.imag
            mats[:, 2 * mdim : 2 * mdim + d, j - 1] = du[j - 1][sel]
            mats[:, 2 * mdim + d :, j - 1] = dv0[j - 1][None, :]
        s = np.linalg.svd(mats, compute_uv=False)
        return [
            ((xi, ti, float(np.angle(z))), float(s[zi, full - 1]))
            for zi, z in enumerate(zetas)
        ]

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_node = list(pool.map(node_sigmas, nodes))
    else:
        per_node = [node_sigmas(node) for node in nodes]

    entries = [e for chunk in per_node for e in chunk]
    min_sigma, argmin = np.inf, None
    for key, sigma in entries:
        if sigma < min_sigma:
            min_sigma, argmin = sigma, key
    return SubmersionReport(
        min_sigma=float(min_sigma),
        argmin_node=argmin,
        passed=bool(min_sigma > sigma_floor),
        sigma_floor=sigma_floor,
        node_sigmas=tuple(entries),
    )


@dataclass(frozen=True)
class SubmersionReport:
    min_sigma: float
    argmin_node: tuple | None
    passed: bool
    sigma_floor: float
    node_sigmas: tuple = field(default_factory=tuple, repr=False)
