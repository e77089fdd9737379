"""Command-line entry point for disc experiments.

Subcommands cover the pipeline end to end: circle-transform self tests, disc
solves, quadric closed-form cross-checks, maximal-rank searches and circle
patching, submersion verification under perturbation and rescaling, wedge
sweeps, and the removability demo (avoiding discs + Cauchy extension +
consistency + isotopy + tube-hit statistics).

Exit codes: 0 success, 1 property/verification failure, 2 spec error,
3 numerical failure. Reports are JSON with sorted keys and no timestamps,
so a fixed spec and seed reproduce byte-identical payloads.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import specs
from .bishop import (
    BishopConvergenceError,
    DomainEscapeError,
    SolverParams,
    solve_bishop,
)
from .circle import CircleGrid, hilbert_transform
from .manifolds import levi_hull_report, rescale
from .oracles import OracleEvaluationError, get_oracle
from .quadric import DiscFamilyParams, closed_form_G
from .ranks import (
    PatchVerificationError,
    SubmersionNodeError,
    patch_over_circle,
    ranks_on_circle,
    realified_stack,
    search_max_rank_at,
    verify_submersion,
)
from .specs import SpecError
from .wedge import (
    AvoidanceError,
    WedgeFitError,
    cauchy_extend,
    consistency_check,
    find_avoiding_disc,
    isotopy_path,
    sweep_centers,
    thinness_scan,
)


class PropertyFailure(RuntimeError):
    """A requested verification property did not hold."""


def _common_params(args, spec) -> dict:
    solver = specs.solver_from_json(spec.get("solver") if spec else None)
    if args.grid is not None:
        solver = SolverParams(
            CircleGrid(args.grid),
            solver.max_iterations,
            args.tol if args.tol is not None else solver.tolerance,
            solver.damping,
            solver.boundary_tolerance,
        )
    elif args.tol is not None:
        solver = SolverParams(
            solver.grid, solver.max_iterations, args.tol, solver.damping,
            solver.boundary_tolerance,
        )
    seed = args.seed if args.seed is not None else int(spec.get("seed", 0)) if spec else 0
    return {"solver": solver, "seed": seed}


def _sweep_grids(spec_section, cone, d, m, rng):
    s = spec_section or {}
    x_lo, x_hi = float(s.get("x_min", -0.1)), float(s.get("x_max", 0.1))
    x_count = int(s.get("x_count", 5))
    base_grid = [
        (c * np.ones(d), np.zeros(m, dtype=complex))
        for c in np.linspace(x_lo, x_hi, x_count)
    ]
    rays = cone.sample_rays(int(s.get("t_rays", 5)), rng)
    t_lo = float(s.get("t_min", 0.05 * cone.scale_max))
    t_hi = float(s.get("t_max", 0.95 * cone.scale_max))
    # geometric ladder: center heights scale like |t|^2, so geometric scale
    # spacing keeps the relative radial gaps of the evidence uniform
    scales = np.geomspace(t_lo, t_hi, int(s.get("t_scales", 8)))
    t_grid = [sc * u for u in rays for sc in scales]
    return base_grid, t_grid


# --------------------------------------------------------------------------
# command handlers: each returns (ok, results, diagnostics, csv_rows)
# --------------------------------------------------------------------------


def cmd_selftest_hilbert(args, spec):
    common = _common_params(args, spec)
    grid = common["solver"].grid
    tol = args.tol if args.tol is not None else 1e-10
    rng = np.random.default_rng(common["seed"])
    phi = grid.angles
    worst = 0.0
    for k in range(1, 9):
        worst = max(worst, float(np.abs(hilbert_transform(np.cos(k * phi)) - np.sin(k * phi)).max()))
        worst = max(worst, float(np.abs(hilbert_transform(np.sin(k * phi)) + np.cos(k * phi)).max()))
    trials = int(args.trials)
    kmax = grid.size // 4
    for _ in range(trials):
        coeffs = rng.standard_normal(kmax) / np.arange(1, kmax + 1)
        u = np.zeros(grid.size)
        for k in range(1, kmax):
            u += coeffs[k] * np.cos(k * phi + rng.uniform(0, 2 * np.pi))
        tt = hilbert_transform(hilbert_transform(u))
        worst = max(worst, float(np.abs(tt - (-u + u.mean())).max()))
    ok = worst < tol
    results = {"max_identity_residual": worst, "tolerance": tol, "trials": trials}
    return ok, results, {"grid": grid.size}, None


def cmd_solve_disc(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    family = specs.family_from_json(spec["family"], m.d, m.m)
    disc = solve_bishop(m, family, family.x, common["solver"])
    res = disc.residuals
    results = {
        "center": specs.vector_out(disc.center()),
        "G": specs.series_out(disc.G.analytic_part()),
        "W": specs.series_out(disc.W),
    }
    diags = {
        "boundary_residual": res.boundary_residual,
        "center_residual": res.center_residual,
        "analyticity_residual": res.analyticity_residual,
        "iterations": res.iterations,
        "converged": res.converged,
    }
    bnd = disc.boundary_points()
    csv_rows = [["phi"] + [f"coord{i}_{p}" for i in range(m.n) for p in ("re", "im")]]
    for i, phi in enumerate(disc.grid.angles):
        row = [phi]
        for v in bnd[i]:
            row.extend([v.real, v.imag])
        csv_rows.append(row)
    return bool(res.converged), results, diags, csv_rows


def cmd_closed_form_check(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    if m.perturbation:
        raise SpecError("closed-form-check requires a pure quadric manifold")
    solver = common["solver"]
    rng = np.random.default_rng(common["seed"])
    trials = int(args.trials)
    worst_coeff, worst_bnd = 0.0, 0.0
    for _ in range(trials):
        N = int(rng.integers(1, 5))
        dirs = rng.standard_normal((N, m.m)) + 1j * rng.standard_normal((N, m.m))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        scales = rng.uniform(0.02, 0.1, N)
        x = rng.uniform(-0.05, 0.05, m.d)
        fam = DiscFamilyParams(x, dirs, scales, t0=0.0)
        disc = solve_bishop(m, fam, x, solver)
        ref = closed_form_G(m.quadric, fam, solver.grid)
        for k in range(N + 1):
            dev = float(np.abs(disc.G.analytic_part().coefficient(k) - ref.coefficient(k)).max())
            worst_coeff = max(worst_coeff, dev)
        worst_bnd = max(worst_bnd, disc.residuals.boundary_residual)
    ok = worst_coeff < 1e-8 and worst_bnd < 1e-9
    results = {
        "max_coefficient_deviation": worst_coeff,
        "max_boundary_residual": worst_bnd,
        "trials": trials,
    }
    return ok, results, {}, None


def cmd_rank_search(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    section = spec.get("rank", {})
    angles = args.zeta if args.zeta else section.get("zeta_angles", [0.0])
    budget = int(section.get("budget", 10000))
    hull = levi_hull_report(m, seed=common["seed"])
    per_zeta = []
    all_ok = True
    for ang in angles:
        res = search_max_rank_at(
            m.quadric, np.exp(1j * float(ang)), budget=budget, seed=common["seed"]
        )
        per_zeta.append(
            {
                "angle": float(ang),
                "success": res.success,
                "N": res.N,
                "rank": res.rank,
                "attempts": res.attempts,
                "reason": res.reason,
                "directions": [specs.vector_out(v) for v in res.directions]
                if res.directions is not None
                else None,
                "scales": list(map(float, res.scales)) if res.scales is not None else None,
            }
        )
        all_ok = all_ok and res.success
    results = {
        "hull_has_interior": hull.hull_has_interior,
        "searches": per_zeta,
        "budget": budget,
    }
    return all_ok, results, {}, None


def cmd_patch_circle(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    section = spec.get("patch", {})
    params, cone = patch_over_circle(
        m.quadric,
        circle_samples=int(section.get("circle_samples", 8)),
        scale_ladder=float(section.get("scale_ladder", 5.0)),
        seed=common["seed"],
        verify_points=int(section.get("verify_points", 720)),
    )
    zetas = np.exp(2j * np.pi * np.arange(720) / 720)
    ranks = ranks_on_circle(m.quadric, params, zetas)
    invariance = {}
    for lam in (1e-3, 1.0, 10.0):
        pr = params.with_scales(params.scales * lam)
        invariance[str(lam)] = int(ranks_on_circle(m.quadric, pr, zetas[::10]).min())
    full = 2 * m.n
    ok = int(ranks.min()) == full and all(v == full for v in invariance.values())
    results = {
        "N": params.N,
        "directions": [specs.vector_out(v) for v in params.directions],
        "scales": list(map(float, params.scales)),
        "cone": {
            "axis": list(map(float, cone.axis)),
            "half_angle": cone.half_angle,
            "scale_max": cone.scale_max,
        },
        "min_rank_720": int(ranks.min()),
        "scale_invariance_ranks": invariance,
        "maximal_rank": full,
    }
    return ok, results, {}, None


def cmd_verify_submersion(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    section = spec.get("verify", {})
    lam = float(section.get("rescale", 1.0))
    target = rescale(m, lam) if lam != 1.0 else m
    full = 2 * m.n
    family = specs.family_from_json(spec["family"], m.d, m.m)
    if family.N < full:
        params, cone = patch_over_circle(m.quadric, seed=common["seed"])
    else:
        params = family
        cone = specs.cone_from_json(spec["cone"])
    rng = np.random.default_rng(common["seed"])
    rays = cone.sample_rays(int(section.get("t_rays", 5)), rng)
    t_list = [0.5 * cone.scale_max * u for u in rays]
    x_vals = np.linspace(
        float(section.get("x_min", -0.05)),
        float(section.get("x_max", 0.05)),
        int(section.get("x_count", 5)),
    )
    x_list = [c * np.ones(m.d) for c in x_vals]
    zeta_count = int(section.get("zeta_count", 32))
    report = verify_submersion(
        target,
        params,
        cone,
        t_list,
        zeta_count=zeta_count,
        x_list=x_list,
        solver=common["solver"],
        fd_step=float(section.get("fd_step", 1e-5)),
        sigma_floor=float(section.get("sigma_floor", 1e-6)),
        jobs=args.jobs,
    )
    stride = common["solver"].grid.size // zeta_count
    zetas = np.exp(1j * common["solver"].grid.angles[::stride])
    quad_min = np.inf
    for t in t_list:
        st = realified_stack(m.quadric, params.with_scales(t), zetas, "M")
        s = np.linalg.svd(st, compute_uv=False)
        quad_min = min(quad_min, float(s[:, full - 1].min()))
    band = float(section.get("quadric_band", 0.2))
    within = abs(report.min_sigma - quad_min) <= band * quad_min
    ok = report.passed and within
    results = {
        "min_sigma": report.min_sigma,
        "argmin_node": list(report.argmin_node) if report.argmin_node else None,
        "sigma_floor": report.sigma_floor,
        "quadric_min_sigma": quad_min,
        "quadric_band": band,
        "within_quadric_band": within,
        "rescale": lam,
        "family_N": params.N,
    }
    csv_rows = [["x_index", "t_index", "zeta_angle", "sigma"]]
    for (xi, ti, ang), sig in report.node_sigmas:
        csv_rows.append([xi, ti, ang, sig])
    return ok, results, {"nodes": len(report.node_sigmas)}, csv_rows


def cmd_sweep_wedge(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    family = specs.family_from_json(spec["family"], m.d, m.m)
    cone_t = specs.cone_from_json(spec["cone"])
    rng = np.random.default_rng(common["seed"])
    base_grid, t_grid = _sweep_grids(spec.get("sweep"), cone_t, m.d, m.m, rng)
    cert = sweep_centers(
        m, family, cone_t, base_grid, t_grid, common["solver"],
        cover_rtol=float(spec.get("sweep", {}).get("cover_rtol", 0.2)),
    )
    min_scale = float(spec.get("sweep", {}).get("min_scale_max", 0.0))
    decomposition_worst = 0.0
    for i, z in enumerate(cert.centers):
        x_p, w_p, eta = cert.decompose(m, z)
        recon = m.embed(x_p, w_p)
        recon[: m.d] += 1j * eta
        decomposition_worst = max(decomposition_worst, float(np.abs(recon - z).max()))
    ok = cert.cone.scale_max >= min_scale and decomposition_worst < 1e-8
    results = {
        "cone": {
            "axis": list(map(float, cert.cone.axis)),
            "half_angle": cert.cone.half_angle,
            "scale_max": cert.cone.scale_max,
        },
        "edge_radius": cert.edge_radius,
        "center_count": len(cert.centers),
        "excluded_nodes": len(cert.excluded_nodes),
        "max_decomposition_defect": decomposition_worst,
        "min_scale_required": min_scale,
    }
    csv_rows = [["center_" + str(i) + "_" + p for i in range(m.n) for p in ("re", "im")]]
    for z in cert.centers:
        row = []
        for v in z:
            row.extend([v.real, v.imag])
        csv_rows.append(row)
    return ok, results, {}, csv_rows


def cmd_removability_demo(args, spec):
    common = _common_params(args, spec)
    m = specs.manifold_from_json(spec["manifold"])
    family = specs.family_from_json(spec["family"], m.d, m.m)
    cone = specs.cone_from_json(spec["cone"])
    K = specs.thinset_from_json(spec.get("thin_set"), m.n, m.d)
    section = spec.get("removability", {})
    z = specs.target_from_json(section["target"], m.n)
    oracle = get_oracle(spec["oracle"]["name"], spec["oracle"].get("params"))
    solver = common["solver"]
    seed = common["seed"]

    floor = float(section.get("clearance_floor", 0.0))
    res = find_avoiding_disc(
        m, K, z, family, cone, budget=int(section.get("budget", 60)),
        seed=seed, clearance_floor=floor, solver=solver,
    )
    if not res.success:
        raise PropertyFailure(
            f"no avoiding disc found (best clearance {res.best_clearance:.4e})"
        )
    value = cauchy_extend(oracle, res.disc)
    expected = complex(oracle(z[None, :])[0])
    ext_tol = float(section.get("extension_tolerance", 1e-6))
    ext_ok = abs(value - expected) <= ext_tol

    cons = consistency_check(
        oracle, m, K, z, family, cone,
        trials=int(section.get("consistency_trials", 6)),
        seed=seed,
        tolerance=float(section.get("consistency_tolerance", 1e-6)),
        solver=solver,
    )

    steps = int(section.get("isotopy_steps", 20))
    path = isotopy_path(m, K, res.disc, steps=steps, solver=solver)

    thin = section.get("thinness")
    thin_results = None
    thin_ok = True
    if thin:
        tdirs = np.array([[specs.cplx(e) for e in row] for row in thin["directions"]])
        tfam = DiscFamilyParams(
            np.zeros(m.d), tdirs, np.asarray(thin["scales"], dtype=float)
        )
        tcone = specs.cone_from_json(thin["cone"])
        comp = K.components[0]
        scan = thinness_scan(
            m, (comp.xs, comp.ws), np.asarray(thin["eta"], dtype=float),
            tfam, tcone, samples=int(thin.get("samples", 10000)),
            radii=tuple(thin.get("radii", (0.1, 0.03, 0.01, 0.003))),
            seed=seed, solver=solver,
        )
        max_final = float(thin.get("max_final_fraction", 1.0))
        thin_ok = scan.monotone and scan.hit_fractions[-1] <= max_final
        thin_results = {
            "radii": list(scan.radii),
            "hit_fractions": list(scan.hit_fractions),
            "samples": scan.samples,
            "monotone": scan.monotone,
            "max_final_fraction": max_final,
        }

    ok = ext_ok and cons.passed and thin_ok
    results = {
        "clearance": res.clearance,
        "raw_distance": res.raw_distance,
        "clearance_floor": floor,
        "attempts": res.attempts,
        "extension_value": specs.cplx_out(value),
        "expected_value": specs.cplx_out(expected),
        "extension_error": abs(value - expected),
        "extension_tolerance": ext_tol,
        "consistency": {
            "values": [specs.cplx_out(v) for v in cons.values],
            "max_deviation": cons.max_deviation,
            "passed": cons.passed,
            "discs": cons.discs_found,
        },
        "isotopy_steps": len(path) - 1,
        "isotopy_final_center": specs.vector_out(path[-1].ambient_center()),
        "thinness": thin_results,
    }
    return ok, results, {}, None


HANDLERS = {
    "selftest-hilbert": (cmd_selftest_hilbert, False),
    "solve-disc": (cmd_solve_disc, True),
    "closed-form-check": (cmd_closed_form_check, True),
    "rank-search": (cmd_rank_search, True),
    "patch-circle": (cmd_patch_circle, True),
    "verify-submersion": (cmd_verify_submersion, True),
    "sweep-wedge": (cmd_sweep_wedge, True),
    "removability-demo": (cmd_removability_demo, True),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crdiscs",
        description="Attached analytic discs on CR graph manifolds: "
        "solvers, rank certificates, wedge sweeps, removability demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--spec", help="spec file path or bundled name")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", help="report file path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--zeta", type=float, action="append", default=None,
                       help="circle angle in radians (repeatable)")
    return parser


_TRIAL_DEFAULTS = {"selftest-hilbert": 50, "closed-form-check": 100}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, needs_spec = HANDLERS[args.command]
    if args.trials is None:
        args.trials = _TRIAL_DEFAULTS.get(args.command, 50)

    spec = None
    code = 0
    try:
        if needs_spec:
            if not args.spec:
                raise SpecError(f"{args.command} requires --spec")
            spec = specs.load_spec(args.spec)
        ok, results, diagnostics, csv_rows = handler(args, spec)
        if not ok:
            code = 1
        solver_section = (spec or {}).get("solver", {}) or {}
        payload = {
            "command": args.command,
            "spec_hash": specs.spec_hash(spec) if spec else specs.spec_hash({}),
            "params": {
                "seed": args.seed if args.seed is not None else (spec or {}).get("seed", 0),
                "grid": args.grid or solver_section.get("grid", 256),
                "tolerance": args.tol
                if args.tol is not None
                else solver_section.get("tolerance", 1e-11),
                "jobs": args.jobs,
            },
            "results": results,
            "diagnostics": {**diagnostics, "passed": ok},
        }
    except SpecError as exc:
        payload = _error_payload(args, "spec-validation", str(exc))
        code = 2
    except ValueError as exc:
        payload = _error_payload(args, "configuration", str(exc))
        code = 2
    except (PropertyFailure, PatchVerificationError, WedgeFitError) as exc:
        payload = _error_payload(args, "verification", str(exc))
        code = 1
    except (
        BishopConvergenceError,
        DomainEscapeError,
        SubmersionNodeError,
        AvoidanceError,
        OracleEvaluationError,
        np.linalg.LinAlgError,
        ArithmeticError,
    ) as exc:
        payload = _error_payload(args, "numerical", str(exc))
        code = 3
    else:
        if args.format == "csv" and csv_rows and args.out:
            csv_path = args.out.rsplit(".", 1)[0] + ".csv"
            with open(csv_path, "w", newline="") as fh:
                csv.writer(fh).writerows(csv_rows)

    text = json.dumps(payload, sort_keys=True, indent=2, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return code


def _error_payload(args, stage, message):
    return {
        "command": args.command,
        "error": {"stage": stage, "message": message},
    }


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj)}")


if __name__ == "__main__":
    sys.exit(main())
