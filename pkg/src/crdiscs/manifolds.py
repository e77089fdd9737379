"""Generic CR submanifolds of C^n in graph normal form.

A manifold is the graph ``{(x + iy, w) : y = h(x, w)}`` over
``R^d x C^{n-d}`` where ``h = q(w, wbar) + perturbation``: ``q`` is a
vector-valued Hermitian quadric and the perturbation is a finite list of
monomials whose constant, linear and pure second-order parts all vanish at
the origin. This module validates that normal form, evaluates the extrinsic
Levi form, tests the convex-hull convexity hypothesis, and recenters the
graph at nearby points by an explicit degree-2 biholomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _polys as pp
from .cones import ConeRegion

HERMITIAN_TOL = 1e-12
REALNESS_TOL = 1e-12
#: floor on the inscribed-ball radius when declaring hull interior
HULL_BALL_RADIUS = 1e-6


def _exp_tuple(exp, length: int, label: str) -> tuple:
    t = tuple(int(e) for e in np.atleast_1d(np.asarray(exp, dtype=int)))
    if len(t) != length or any(e < 0 for e in t):
        raise ValueError(f"{label} exponent {t} invalid for length {length}")
    return t


@dataclass(frozen=True)
class Monomial:
    """One perturbation term ``coefficient * x^alpha * w^beta * wbar^gamma``.

    Coefficients may be complex; real-valuedness of the full perturbation is
    achieved by conjugate pairing, checked in :func:`check_normal_form`.
    """

    coefficient: np.ndarray
    alpha: tuple
    beta: tuple
    gamma: tuple

    def __post_init__(self):
        coeff = np.atleast_1d(np.asarray(self.coefficient, dtype=complex))
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        object.__setattr__(self, "gamma", tuple(int(g) for g in self.gamma))

    @property
    def degree(self) -> int:
        return sum(self.alpha) + sum(self.beta) + sum(self.gamma)

    def conjugate_key(self) -> tuple:
        return (self.alpha, self.gamma, self.beta)

    def key(self) -> tuple:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class QuadricForm:
    """Vector-valued Hermitian form: component l of q(a, bbar) is a^T H_l conj(b)."""

    matrices: np.ndarray

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim == 2:
            mats = mats[None, :, :]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected (d, m, m) matrix stack, got shape {mats.shape}")
        defect = np.abs(mats - np.conj(np.swapaxes(mats, 1, 2))).max(initial=0.0)
        if defect > HERMITIAN_TOL * max(1.0, np.abs(mats).max(initial=0.0)):
            raise ValueError(f"quadric matrices are not Hermitian (defect {defect:.3e})")
        mats = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self) -> int:
        return self.matrices.shape[0]

    @property
    def m(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, a, b_conj=None) -> np.ndarray:
        """q(a, bbar); with one argument returns the real diagonal q(a, abar)."""
        a = np.asarray(a, dtype=complex).reshape(self.m)
        if b_conj is None:
            vals = np.einsum("ljk,j,k->l", self.matrices, a, np.conj(a))
            return vals.real
        bb = np.asarray(b_conj, dtype=complex).reshape(self.m)
        return np.einsum("ljk,j,k->l", self.matrices, a, bb)

    def pair(self, a, b) -> np.ndarray:
        """q(a, conj(b)) for unconjugated second argument b."""
        return self(a, np.conj(np.asarray(b, dtype=complex)))

    @classmethod
    def zero(cls, d: int, m: int) -> "QuadricForm":
        return cls(np.zeros((d, m, m), dtype=complex))

    @classmethod
    def scalar(cls, m: int = 1) -> "QuadricForm":
        """The Lewy-type form |w|^2 (identity matrix, d = 1)."""
        return cls(np.eye(m, dtype=complex)[None, :, :])


@dataclass(frozen=True)
class CRGraphManifold:
    """Graph-form CR manifold data; immutable, validated on construction."""

    n: int
    d: int
    quadric: QuadricForm
    perturbation: tuple = ()
    domain_radius: float = 1.0

    def __post_init__(self):
        if not 1 <= self.d <= self.n - 1:
            raise ValueError(f"need 1 <= d <= n-1, got d={self.d}, n={self.n}")
        m = self.n - self.d
        if self.quadric.d != self.d or self.quadric.m != m:
            raise ValueError(
                f"quadric shape {self.quadric.matrices.shape} does not match (d={self.d}, m={m})"
            )
        if self.domain_radius <= 0:
            raise ValueError("domain_radius must be positive")
        terms = tuple(self.perturbation)
        for t in terms:
            if not isinstance(t, Monomial):
                raise TypeError("perturbation entries must be Monomial instances")
            if t.coefficient.shape != (self.d,):
                raise ValueError(f"monomial coefficient must have dimension d={self.d}")
            _exp_tuple(t.alpha, self.d, "alpha")
            _exp_tuple(t.beta, m, "beta")
            _exp_tuple(t.gamma, m, "gamma")
        object.__setattr__(self, "perturbation", terms)

    @property
    def m(self) -> int:
        """CR dimension n - d (number of w variables)."""
        return self.n - self.d

    @property
    def real_dimension(self) -> int:
        return 2 * self.n - self.d

    @cached_property
    def _term_arrays(self):
        """Packed perturbation arrays for the evaluation kernels."""
        T = len(self.perturbation)
        coeffs = np.zeros((T, self.d), dtype=complex)
        alphas = np.zeros((T, self.d), dtype=np.int64)
        betas = np.zeros((T, self.m), dtype=np.int64)
        gammas = np.zeros((T, self.m), dtype=np.int64)
        for i, t in enumerate(self.perturbation):
            coeffs[i] = t.coefficient
            alphas[i] = t.alpha
            betas[i] = t.beta
            gammas[i] = t.gamma
        return coeffs, alphas, betas, gammas

    def embed(self, x, w) -> np.ndarray:
        """Ambient coordinates (x + i h(x,w), w) of a graph point."""
        x = np.asarray(x, dtype=float).reshape(self.d)
        w = np.asarray(w, dtype=complex).reshape(self.m)
        h = evaluate_h(self, x, w)
        return np.concatenate([x + 1j * h, w])

    def graph_coordinates(self, z_ambient) -> tuple:
        z = np.asarray(z_ambient, dtype=complex).reshape(self.n)
        return z[: self.d].real.copy(), z[self.d :].copy()


@dataclass(frozen=True)
class LeviReport:
    """Sampled extrinsic Levi form values and the convex-hull interior test."""

    directions: np.ndarray
    values: np.ndarray
    hull_has_interior: bool
    witness_cone: ConeRegion | None = None
    interior_point: np.ndarray | None = None

    @property
    def evaluations(self) -> list:
        return [(self.directions[i], self.values[i]) for i in range(len(self.values))]


def evaluate_h(m: CRGraphManifold, x, w) -> np.ndarray:
    """Graph height h(x, w) = q(w, wbar) + perturbation terms."""
    x = np.asarray(x, dtype=float).reshape(1, m.d)
    w = np.asarray(w, dtype=complex).reshape(1, m.m)
    return evaluate_h_grid(m, x, w)[0]


def evaluate_h_grid(m: CRGraphManifold, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized h over rows of (x, w); enforces the domain radius."""
    from . import _kernels

    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    w = np.ascontiguousarray(np.asarray(w, dtype=complex))
    if x.ndim != 2 or w.ndim != 2 or x.shape[0] != w.shape[0]:
        raise ValueError("x and w must be matching sample stacks")
    norms2 = np.sum(x * x, axis=1) + np.sum(np.abs(w) ** 2, axis=1)
    worst = np.sqrt(norms2.max(initial=0.0))
    if worst > m.domain_radius * (1.0 + 1e-12):
        raise ValueError(
            f"input point at radius {worst:.4f} outside graph domain {m.domain_radius:.4f}"
        )
    coeffs, alphas, betas, gammas = m._term_arrays
    return _kernels.eval_h_grid(m.quadric.matrices, coeffs, alphas, betas, gammas, x, w)


def quadric_of(m: CRGraphManifold) -> QuadricForm:
    """The Hermitian second mixed derivative of h at 0 (stored form)."""
    return m.quadric


def check_normal_form(m: CRGraphManifold) -> list:
    """Violations of the graph normal form; empty list means valid.

    Checks, symbolically on the monomial list: vanishing of h and of every
    pure derivative in (x, w) and (x, wbar) up to total order 2 at the
    origin (the mixed w-wbar Hessian is the quadric and exempt), and
    real-valuedness of the perturbation via conjugate pairing.
    """
    violations = []
    totals: dict = {}
    for t in m.perturbation:
        totals[t.key()] = totals.get(t.key(), 0) + t.coefficient
    for (alpha, beta, gamma), coeff in totals.items():
        if np.abs(coeff).max() <= REALNESS_TOL:
            continue
        deg = sum(alpha) + sum(beta) + sum(gamma)
        name = f"x^{alpha} w^{beta} wbar^{gamma}"
        if deg > 2:
            continue
        if sum(beta) == 0 and sum(gamma) == 0:
            violations.append(
                f"pure x-derivative of order {sum(alpha)} at 0 is nonzero (term {name})"
            )
        elif sum(gamma) == 0:
            violations.append(
                f"derivative d^{sum(alpha)}x d^{sum(beta)}w of h at 0 is nonzero (term {name})"
            )
        elif sum(beta) == 0:
            violations.append(
                f"derivative d^{sum(alpha)}x d^{sum(gamma)}wbar of h at 0 is nonzero (term {name})"
            )
        else:
            violations.append(
                f"degree-2 mixed term {name} belongs to the quadric, not the perturbation"
            )
    for (alpha, beta, gamma), coeff in totals.items():
        partner = totals.get((alpha, gamma, beta))
        ref = np.abs(coeff).max()
        if ref <= REALNESS_TOL:
            continue
        if partner is None or np.abs(partner - np.conj(coeff)).max() > 1e-9 * max(1.0, ref):
            violations.append(
                f"perturbation is not real-valued: term x^{alpha} w^{beta} wbar^{gamma} "
                "lacks a matching conjugate partner"
            )
    return violations


def levi_form(m: CRGraphManifold, W) -> np.ndarray:
    """Extrinsic Levi form at the origin of the normal form.

    With defining functions rho_l = h_l(x, w) - y_l and the normal frame
    normalized so that values land in the y-coordinates, the form reduces to
    the quadric: value = q(W, conj W).
    """
    return m.quadric(np.asarray(W, dtype=complex).reshape(m.m))


def quadric_hull_report(
    q: QuadricForm, sample_count: int = 4096, seed: int = 0
) -> LeviReport:
    """Convex-hull interior test for the image of a quadric form.

    Samples directions, takes the convex hull of the values in R^d, and
    declares nonempty interior when a ball of radius ``HULL_BALL_RADIUS``
    around the sample mean lies inside the hull. On success a truncated
    witness cone fitted around the mean direction is reported.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((sample_count, q.m)) + 1j * rng.standard_normal((sample_count, q.m))
    vals = np.empty((sample_count, q.d))
    for i in range(sample_count):
        vals[i] = q(dirs[i])
    return _hull_report(dirs, vals, rng)


def levi_hull_report(m: CRGraphManifold, sample_count: int = 4096, seed: int = 0) -> LeviReport:
    return quadric_hull_report(m.quadric, sample_count=sample_count, seed=seed)


def _hull_report(dirs, vals, rng) -> LeviReport:
    d = vals.shape[1]
    mean = vals.mean(axis=0)
    if d == 1:
        lo, hi = float(vals.min()), float(vals.max())
        center = float(mean[0])
        has_interior = (lo + HULL_BALL_RADIUS < center) and (center < hi - HULL_BALL_RADIUS)
        cone = None
        if has_interior and center != 0.0:
            sign = np.sign(center)
            smax = hi if sign > 0 else -lo
            # the segment (0.1 smax, 0.9 smax) along the signed axis must sit in [lo, hi]
            seg_lo, seg_hi = sorted((sign * 0.1 * smax, sign * 0.9 * smax))
            if smax > HULL_BALL_RADIUS and lo <= seg_lo and seg_hi <= hi:
                cone = ConeRegion(np.array([sign]), np.pi / 4, 0.9 * smax)
        return LeviReport(dirs, vals, has_interior, cone, mean if has_interior else None)

    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(vals)
    except QhullError:
        return LeviReport(dirs, vals, False, None, None)
    eqs = hull.equations  # rows (A | b) with A z + b <= 0 inside
    A, b = eqs[:, :-1], eqs[:, -1]
    margin = -(A @ mean + b)
    if margin.min() < HULL_BALL_RADIUS:
        return LeviReport(dirs, vals, False, None, None)
    cone = _fit_witness_cone(mean, A, b)
    return LeviReport(dirs, vals, True, cone, mean)


def _cone_scale_along(u, A, b) -> float:
    """Largest s with s*u inside {A z + b <= 0}."""
    Au = A @ u
    pos = Au > 1e-15
    if not pos.any():
        return np.inf
    return float(np.min(-b[pos] / Au[pos]))


def _fit_witness_cone(mean, A, b, rays: int = 64, bisection_steps: int = 10):
    """Truncated cone around the mean whose mid-scale ray points sit in the hull.

    The sampled image hull does not reach the apex, so the certificate is
    interior membership of representative ray points (fractions of the
    reported scale) with a safety margin; callers may then certify random
    rays at the half scale against the hull inequalities.
    """
    axis = mean / np.linalg.norm(mean)
    fracs = (0.25, 0.4, 0.5, 0.6, 0.75)

    def feasible(theta):
        # fixed internal seed keeps the bisection monotone and deterministic
        probe = ConeRegion(axis, theta, 1.0)
        dirs = probe.sample_rays(rays, np.random.default_rng(12345))
        scale = np.inf
        for u in dirs:
            scale = min(scale, _cone_scale_along(u, A, b))
            if scale <= HULL_BALL_RADIUS:
                return 0.0
        scale *= 0.9
        margin = 1e-4 * scale
        for u in dirs:
            for frac in fracs:
                if (A @ (frac * scale * u) + b).max() > -margin:
                    return 0.0
        return scale

    lo, hi = 0.0, np.pi / 2 * 0.999
    best_theta, best_scale = None, None
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        s = feasible(mid)
        if s > 0:
            best_theta, best_scale = mid, s
            lo = mid
        else:
            hi = mid
    if best_theta is None:
        theta0 = 1e-3
        s = feasible(theta0)
        if s <= 0:
            return None
        best_theta, best_scale = theta0, s
    return ConeRegion(axis, best_theta, best_scale)


def rescale(m: CRGraphManifold, lam: float) -> CRGraphManifold:
    """Parabolic rescaling h_lam(x, w) = h(lam x, lam w) / lam^2.

    The quadric is invariant; a degree-k monomial coefficient picks up the
    factor lam^(k-2); the graph domain dilates by 1/lam.
    """
    if lam <= 0:
        raise ValueError(f"rescaling factor must be positive, got {lam}")
    terms = tuple(
        Monomial(t.coefficient * lam ** (t.degree - 2), t.alpha, t.beta, t.gamma)
        for t in m.perturbation
    )
    return CRGraphManifold(m.n, m.d, m.quadric, terms, m.domain_radius / lam)


# ---------------------------------------------------------------------------
# recentering: degree-2 biholomorphism restoring the normal form at a point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoloPolyMap:
    """Holomorphic polynomial map C^n -> C^n over variables (z_1..z_d, w_1..w_m)."""

    components: tuple
    n: int
    d: int

    @property
    def m(self) -> int:
        return self.n - self.d

    @classmethod
    def identity(cls, n: int, d: int) -> "HoloPolyMap":
        comps = tuple(pp.p_var(i, n) for i in range(n))
        return cls(comps, n, d)

    def is_identity(self, tol: float = 0.0) -> bool:
        ident = HoloPolyMap.identity(self.n, self.d)
        for a, b in zip(self.components, ident.components):
            keys = set(a) | set(b)
            for k in keys:
                if abs(a.get(k, 0.0) - b.get(k, 0.0)) > tol:
                    return False
        return True

    def degree(self) -> int:
        return max(pp.p_degree(c) for c in self.components)

    def apply(self, z_ambient) -> np.ndarray:
        z = np.asarray(z_ambient, dtype=complex).reshape(self.n)
        return np.array([pp.p_eval(c, z) for c in self.components])

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        return np.array([self.apply(p) for p in pts])

    def jacobian(self, z_ambient) -> np.ndarray:
        z = np.asarray(z_ambient, dtype=complex).reshape(self.n)
        J = np.zeros((self.n, self.n), dtype=complex)
        for i, comp in enumerate(self.components):
            for e, c in comp.items():
                for j, k in enumerate(e):
                    if k == 0:
                        continue
                    v = c * k
                    for l, kl in enumerate(e):
                        pw = kl - 1 if l == j else kl
                        if pw:
                            v = v * z[l] ** pw
                    J[i, j] += v
        return J

    def invert(self, target, guess=None, tol: float = 1e-13, max_iter: int = 60) -> np.ndarray:
        """Newton inversion of the map near its domain of biholomorphy."""
        target = np.asarray(target, dtype=complex).reshape(self.n)
        z = np.array(target if guess is None else guess, dtype=complex).reshape(self.n).copy()
        for _ in range(max_iter):
            r = self.apply(z) - target
            if np.abs(r).max() < tol:
                return z
            z = z - np.linalg.solve(self.jacobian(z), r)
        r = np.abs(self.apply(z) - target).max()
        if r > 1e-8:
            raise RuntimeError(f"map inversion stalled (residual {r:.3e})")
        return z


def _manifold_poly(m: CRGraphManifold) -> list:
    """h as a vector of exact polynomials over the layout (x, w, wbar)."""
    d, mm = m.d, m.m
    nv = d + 2 * mm
    polys = [pp.p_zero() for _ in range(d)]
    H = m.quadric.matrices
    for l in range(d):
        for j in range(mm):
            for k in range(mm):
                c = H[l, j, k]
                if c != 0:
                    e = [0] * nv
                    e[d + j] += 1
                    e[d + mm + k] += 1
                    key = tuple(e)
                    polys[l][key] = polys[l].get(key, 0.0) + c
    for t in m.perturbation:
        e = tuple(list(t.alpha) + list(t.beta) + list(t.gamma))
        for l in range(d):
            if t.coefficient[l] != 0:
                polys[l][e] = polys[l].get(e, 0.0) + t.coefficient[l]
    return polys


def _graph_from_imag(y_polys, x_polys, d, mm, nv, degree):
    """Re-express Im-part polys as a graph over (Re-part, w) parameters."""
    xinv = pp.invert_graph_parameter(x_polys, d, nv, degree)
    ident = [pp.p_var(i, nv) for i in range(nv)]
    subs = xinv + ident[d:]
    return [pp.p_subst(y, subs, degree) for y in y_polys]


def normalize_at_point(m: CRGraphManifold, p, degree: int | None = None):
    """Recenter the graph at a point p = (x_p, w_p) of M.

    Returns ``(map, manifold)`` where ``map`` is a degree <= 2 holomorphic
    polynomial map taking the ambient point over p to 0 and ``manifold`` is
    the image graph, in normal form: constant, linear and pure second-order
    parts vanish exactly, with the perturbation re-expanded and truncated at
    ``degree`` (default: max of 4 and the original perturbation degree).

    Raises ``ValueError`` when the linear normalization is singular at p
    (degenerate graph data).
    """
    d, mm, n = m.d, m.m, m.n
    nv = d + 2 * mm
    x_p = np.asarray(p[0], dtype=float).reshape(d)
    w_p = np.asarray(p[1], dtype=complex).reshape(mm)
    pnorm = float(np.sqrt(np.sum(x_p * x_p) + np.sum(np.abs(w_p) ** 2)))
    if pnorm > 0.5 * m.domain_radius:
        raise ValueError(
            f"recentering point at radius {pnorm:.4f} exceeds half the domain radius"
        )
    if degree is None:
        degree = max(4, max((t.degree for t in m.perturbation), default=2))

    y_p = evaluate_h(m, x_p, w_p)

    # Taylor shift of h to the point: parameters (x', dw, dwb).
    base = _manifold_poly(m)
    shift = (
        [pp.p_add(pp.p_const(x_p[i], nv), pp.p_var(i, nv)) for i in range(d)]
        + [pp.p_add(pp.p_const(w_p[j], nv), pp.p_var(d + j, nv)) for j in range(mm)]
        + [pp.p_add(pp.p_const(np.conj(w_p[j]), nv), pp.p_var(d + mm + j, nv)) for j in range(mm)]
    )
    h1 = []
    for l in range(d):
        poly = pp.p_subst(base[l], shift, degree)
        pp.p_axpy(poly, pp.p_const(y_p[l], nv), -1.0)
        h1.append(pp.p_clean(poly, 0.0))

    # Linear normalization z'' = C z' + D w' flattening the tangent space.
    a = np.zeros((d, d))
    b = np.zeros((d, mm), dtype=complex)
    for l in range(d):
        lin = pp.p_linear_part(h1[l], nv)
        if np.abs(lin[:d].imag).max(initial=0.0) > 1e-10:
            raise ValueError("graph height has non-real x-gradient; invalid manifold data")
        a[l] = lin[:d].real
        b[l] = lin[d : d + mm]
    C = np.eye(d) - 1j * a
    if np.linalg.cond(C) > 1e12:
        raise ValueError("normalization Jacobian is singular at p (degenerate graph data)")
    D = -2j * b

    zpp = []
    for l in range(d):
        poly = pp.p_zero()
        for k in range(d):
            pp.p_axpy(poly, pp.p_var(k, nv), C[l, k])
            pp.p_axpy(poly, h1[k], 1j * C[l, k])
        for j in range(mm):
            pp.p_axpy(poly, pp.p_var(d + j, nv), D[l, j])
        zpp.append(pp.p_clean(poly, 0.0))

    X1 = [pp.p_real(z, d, mm) for z in zpp]
    Y1 = [pp.p_imag(z, d, mm) for z in zpp]
    h2 = _graph_from_imag(Y1, X1, d, mm, nv, degree)

    # Quadratic shear killing the pure second-order part of h2.
    na = d + mm
    P_amb = [pp.p_zero() for _ in range(d)]
    for l in range(d):
        for e, c in h2[l].items():
            if sum(e) != 2:
                continue
            alpha, beta, gamma = e[:d], e[d : d + mm], e[d + mm :]
            if sum(gamma) != 0:
                continue  # conjugate partners are handled by pairing
            key = tuple(list(alpha) + list(beta))
            factor = 1.0 if sum(beta) == 0 else 2.0
            P_amb[l][key] = P_amb[l].get(key, 0.0) + factor * c

    has_shear = any(P_amb[l] for l in range(d))
    if has_shear:
        zvars = [pp.p_var(i, nv) for i in range(nv)]
        amb_subs = list(zpp) + zvars[d : d + mm]
        znew = []
        for l in range(d):
            corr = pp.p_subst(P_amb[l], amb_subs, degree)
            poly = dict(zpp[l])
            pp.p_axpy(poly, corr, -1j)
            znew.append(pp.p_clean(poly, 0.0))
        X2 = [pp.p_real(z, d, mm) for z in znew]
        Y2 = [pp.p_imag(z, d, mm) for z in znew]
        h3 = _graph_from_imag(Y2, X2, d, mm, nv, degree)
    else:
        h3 = h2

    new_manifold = _manifold_from_polys(m, h3, degree, pnorm)
    phi = _assemble_map(m, x_p, w_p, y_p, C, D, P_amb, has_shear)
    return phi, new_manifold


def _manifold_from_polys(m, h_polys, degree, pnorm) -> CRGraphManifold:
    d, mm = m.d, m.m
    scale = max(1.0, max((abs(c) for poly in h_polys for c in poly.values()), default=1.0))
    H = np.zeros((d, mm, mm), dtype=complex)
    terms: dict = {}
    for l in range(d):
        for e, c in h_polys[l].items():
            if abs(c) <= 1e-11 * scale:
                continue
            deg = sum(e)
            alpha, beta, gamma = e[:d], e[d : d + mm], e[d + mm :]
            if deg == 2 and sum(beta) == 1 and sum(gamma) == 1:
                H[l, beta.index(1), gamma.index(1)] += c
                continue
            if deg <= 2:
                raise ArithmeticError(
                    f"recentering left a low-order term {e} with coefficient {c:.3e}"
                )
            vec = terms.setdefault((alpha, beta, gamma), np.zeros(d, dtype=complex))
            vec[l] += c
    # enforce exact conjugate pairing (defends against roundoff drift)
    quad = QuadricForm(0.5 * (H + np.conj(np.swapaxes(H, 1, 2))))
    paired: dict = {}
    for (alpha, beta, gamma), vec in terms.items():
        partner = terms.get((alpha, gamma, beta), np.zeros(m.d, dtype=complex))
        paired[(alpha, beta, gamma)] = 0.5 * (vec + np.conj(partner))
    monos = tuple(
        Monomial(vec, alpha, beta, gamma)
        for (alpha, beta, gamma), vec in sorted(paired.items())
        if np.abs(vec).max() > 1e-13 * scale
    )
    radius = max(0.5 * (m.domain_radius - pnorm), 1e-6)
    return CRGraphManifold(m.n, m.d, quad, monos, radius)


def _assemble_map(m, x_p, w_p, y_p, C, D, P_amb, has_shear) -> HoloPolyMap:
    d, mm, n = m.d, m.m, m.n
    z_p = x_p + 1j * y_p
    # affine stage: s[l] = sum C[l,k](z_k - zp_k) + sum D[l,j](w_j - wp_j)
    s_z = []
    for l in range(d):
        poly = pp.p_zero()
        const = 0.0 + 0.0j
        for k in range(d):
            pp.p_axpy(poly, pp.p_var(k, n), C[l, k])
            const -= C[l, k] * z_p[k]
        for j in range(mm):
            pp.p_axpy(poly, pp.p_var(d + j, n), D[l, j])
            const -= D[l, j] * w_p[j]
        pp.p_axpy(poly, pp.p_const(const, n))
        s_z.append(pp.p_clean(poly, 0.0))
    s_w = []
    for j in range(mm):
        poly = pp.p_var(d + j, n)
        pp.p_axpy(poly, pp.p_const(-w_p[j], n))
        s_w.append(pp.p_clean(poly, 0.0))

    comps = []
    if has_shear:
        subs = s_z + s_w
        for l in range(d):
            corr = pp.p_subst(P_amb[l], subs, 4)
            poly = dict(s_z[l])
            pp.p_axpy(poly, corr, -1j)
            comps.append(pp.p_clean(poly, 0.0))
    else:
        comps = [dict(s) for s in s_z]
    comps.extend(dict(s) for s in s_w)
    return HoloPolyMap(tuple(comps), n, d)
