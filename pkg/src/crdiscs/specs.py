"""JSON (de)serialization of experiment specs, reports, and bundled examples.

Schema conventions: complex numbers are ``[re, im]`` pairs, series are
``{frequency: [re, im] ...}`` maps (one pair list per vector component),
matrices are nested row-major arrays of pairs. Reports carry no timestamps
so identical spec + seed reproduces byte-identical payloads.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import numpy as np

from .bishop import SolverParams
from .circle import CircleGrid, FourierSeries
from .cones import ConeRegion
from .manifolds import CRGraphManifold, Monomial, QuadricForm, check_normal_form
from .quadric import DiscFamilyParams
from .wedge import ThinSet, ThinSetComponent


class SpecError(ValueError):
    """Malformed or inconsistent experiment specification."""


def cplx(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SpecError(f"complex entries are [re, im] pairs, got {value!r}")
        return complex(value[0], value[1])
    return complex(value)


def cplx_out(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def vector_out(v) -> list:
    return [cplx_out(z) for z in np.asarray(v, dtype=complex)]


def series_out(series: FourierSeries) -> dict:
    out = {}
    for k, vec in sorted(series.coefficients.items()):
        if np.abs(vec).max(initial=0.0) > 1e-15:
            out[str(k)] = vector_out(vec)
    return out


def manifold_from_json(spec: dict) -> CRGraphManifold:
    try:
        n = int(spec["n"])
        d = int(spec["d"])
        mats = np.array(
            [[[cplx(e) for e in row] for row in mat] for mat in spec["quadric"]],
            dtype=complex,
        )
        terms = []
        for t in spec.get("perturbation", []):
            coeff = np.array([cplx(c) for c in t["coefficient"]], dtype=complex)
            terms.append(Monomial(coeff, tuple(t["alpha"]), tuple(t["beta"]), tuple(t["gamma"])))
        radius = float(spec.get("domain_radius", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid manifold spec: {exc}") from exc
    try:
        manifold = CRGraphManifold(n, d, QuadricForm(mats), tuple(terms), radius)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid manifold spec: {exc}") from exc
    violations = check_normal_form(manifold)
    if violations:
        raise SpecError(
            "manifold violates the graph normal form: " + "; ".join(violations)
        )
    return manifold


def manifold_to_json(m: CRGraphManifold) -> dict:
    return {
        "n": m.n,
        "d": m.d,
        "quadric": [
            [[cplx_out(e) for e in row] for row in mat] for mat in m.quadric.matrices
        ],
        "perturbation": [
            {
                "coefficient": vector_out(t.coefficient),
                "alpha": list(t.alpha),
                "beta": list(t.beta),
                "gamma": list(t.gamma),
            }
            for t in m.perturbation
        ],
        "domain_radius": m.domain_radius,
    }


def family_from_json(spec: dict, d: int, m: int) -> DiscFamilyParams:
    try:
        x = np.asarray(spec.get("x", [0.0] * d), dtype=float)
        directions = np.array(
            [[cplx(e) for e in row] for row in spec["directions"]], dtype=complex
        )
        scales = np.asarray(spec["scales"], dtype=float)
        a0 = spec.get("a0")
        if a0 is not None:
            a0 = np.array([cplx(e) for e in a0], dtype=complex)
        t0 = float(spec.get("t0", 1.0))
        radius = float(spec.get("family_radius", 1.0))
        return DiscFamilyParams(x, directions, scales, a0, t0, radius)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid family spec: {exc}") from exc


def cone_from_json(spec: dict) -> ConeRegion:
    try:
        return ConeRegion(
            np.asarray(spec["axis"], dtype=float),
            float(spec["half_angle"]),
            float(spec["scale_max"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid cone spec: {exc}") from exc


def solver_from_json(spec: dict | None) -> SolverParams:
    spec = spec or {}
    try:
        return SolverParams(
            grid=CircleGrid(int(spec.get("grid", 256))),
            max_iterations=int(spec.get("max_iterations", 200)),
            tolerance=float(spec.get("tolerance", 1e-11)),
            damping=float(spec.get("damping", 1.0)),
            boundary_tolerance=float(spec.get("boundary_tolerance", 1e-9)),
        )
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid solver spec: {exc}") from exc


def thinset_from_json(spec: dict | None, n: int, d: int) -> ThinSet:
    if not spec:
        return ThinSet.empty(n, d)
    comps = []
    try:
        for c in spec.get("components", []):
            xs = np.atleast_2d(np.asarray(c["x"], dtype=float))
            ws = np.array(
                [[cplx(e) for e in row] for row in c["w"]], dtype=complex
            )
            comps.append(
                ThinSetComponent(xs, ws, float(c.get("tube", 0.0)), int(c.get("dim", 0)))
            )
        return ThinSet(
            tuple(comps), n, d, bool(spec.get("allow_codim2_class", False))
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid thin-set spec: {exc}") from exc


def target_from_json(value, n: int) -> np.ndarray:
    z = np.array([cplx(e) for e in value], dtype=complex)
    if z.shape != (n,):
        raise SpecError(f"target point must have {n} complex entries")
    return z


def spec_hash(spec: dict) -> str:
    canon = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


BUNDLED = ("lewy", "lewy-perturbed", "product-quadric", "degenerate-line")


def bundled_spec(name: str) -> dict:
    if name not in BUNDLED:
        raise SpecError(f"unknown bundled spec {name!r}; choose from {BUNDLED}")
    text = resources.files("crdiscs").joinpath("data", f"{name}.json").read_text()
    return json.loads(text)


def load_spec(path_or_name: str) -> dict:
    """Load a spec file; bare bundled names resolve to packaged examples."""
    if path_or_name in BUNDLED:
        return bundled_spec(path_or_name)
    try:
        with open(path_or_name) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path_or_name}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
