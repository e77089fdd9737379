#!/usr/bin/env python3
"""Benchmark the compiled disc-solver kernels against the pure-numpy fallback.

Times the fused fixed-point loop (the hot path of submersion verification and
wedge sweeps) and the graph-height evaluation on representative problems, and
cross-checks that both backends agree to roundoff.

Run after building the extension:
    python benchmarks/bench_kernels.py [--grid 256] [--repeats 200]
"""

import argparse
import time

import numpy as np

from crdiscs import CircleGrid, hilbert_matrix
from crdiscs._kernels import implementations


def build_problem(grid_size, n_modes=4, nterms=2, seed=0):
    rng = np.random.default_rng(seed)
    H = np.ones((1, 1, 1), dtype=complex)
    coeffs = np.full((nterms, 1), 0.02, dtype=complex)
    alphas = np.array([[1], [0]], dtype=np.int64)[:nterms]
    betas = np.array([[1], [3]], dtype=np.int64)[:nterms]
    gammas = np.array([[1], [0]], dtype=np.int64)[:nterms]
    phi = CircleGrid(grid_size).angles
    w = np.zeros((grid_size, 1), dtype=complex)
    for j in range(1, n_modes + 1):
        a = rng.standard_normal() + 1j * rng.standard_normal()
        w[:, 0] += 0.05 * a / abs(a) * np.exp(1j * j * phi)
    x = np.array([0.01])
    u0 = np.tile(x, (grid_size, 1))
    hilb = np.asarray(hilbert_matrix(grid_size))
    return (H, coeffs, alphas, betas, gammas, w, x, u0, hilb)


def time_solver(impl, problem, repeats, damping=0.5):
    # damping < 1 forces a realistic iteration count; the fused loop is the
    # hot path once the per-call setup is amortized over many iterations
    H, coeffs, alphas, betas, gammas, w, x, u0, hilb = problem
    args = (H, coeffs, alphas, betas, gammas, w, x, u0, hilb, damping, 1e-12, 400, 10.0)
    impl.picard_solve(*args)  # warm up
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            u, iters, change, escaped = impl.picard_solve(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best, u, iters


def time_eval(impl, problem, repeats):
    H, coeffs, alphas, betas, gammas, w, x, u0, _ = problem
    u = np.tile(x, (w.shape[0], 1))
    impl.eval_h_grid(H, coeffs, alphas, betas, gammas, u, w)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            out = impl.eval_h_grid(H, coeffs, alphas, betas, gammas, u, w)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    impls = implementations()
    print(f"backends available: {', '.join(impls)}")
    problem = build_problem(args.grid)

    solver_results = {}
    eval_results = {}
    for name, impl in impls.items():
        solver_results[name] = time_solver(impl, problem, args.repeats)
        eval_results[name] = time_eval(impl, problem, args.repeats * 5)

    print(f"\nfixed-point solve (grid {args.grid}, cubic + mixed perturbation):")
    base = solver_results.get("pure", list(solver_results.values())[0])[0]
    for name, (dt, u, iters) in solver_results.items():
        print(f"  {name:9s} {dt * 1e6:9.1f} us/solve  ({iters} iterations, "
              f"speedup x{base / dt:.2f})")

    print(f"\ngraph-height evaluation (grid {args.grid}):")
    base = eval_results.get("pure", list(eval_results.values())[0])[0]
    for name, (dt, _) in eval_results.items():
        print(f"  {name:9s} {dt * 1e6:9.1f} us/call   (speedup x{base / dt:.2f})")

    if len(impls) == 2:
        du = np.abs(solver_results["pure"][1] - solver_results["compiled"][1]).max()
        dh = np.abs(eval_results["pure"][1] - eval_results["compiled"][1]).max()
        print(f"\nbackend agreement: |du| = {du:.2e}, |dh| = {dh:.2e}")
        assert du < 1e-12 and dh < 1e-13, "backends disagree beyond roundoff"


if __name__ == "__main__":
    main()
