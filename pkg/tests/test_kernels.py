"""Parity checks between the compiled kernel and the pure-numpy fallback."""

import numpy as np
import pytest

from crdiscs import hilbert_matrix
from crdiscs._kernels import backend_name, implementations


def _random_problem(rng, d=1, m=1, nterms=2, size=64):
    H = rng.standard_normal((d, m, m)) + 1j * rng.standard_normal((d, m, m))
    H = 0.5 * (H + np.conj(np.swapaxes(H, 1, 2)))
    coeffs = (rng.standard_normal((nterms, d)) * 0.1).astype(complex)
    alphas = rng.integers(0, 2, (nterms, d)).astype(np.int64)
    betas = rng.integers(0, 3, (nterms, m)).astype(np.int64)
    gammas = betas.copy()  # conjugate-symmetric exponents keep terms real-ish
    x = rng.uniform(-0.3, 0.3, (size, d))
    w = 0.3 * (rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m)))
    return H, coeffs, alphas, betas, gammas, x, w


def test_backend_selected():
    assert backend_name() in ("compiled", "pure")


def test_eval_h_grid_parity():
    impls = implementations()
    if len(impls) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(0)
    for trial in range(10):
        H, coeffs, alphas, betas, gammas, x, w = _random_problem(
            rng, d=1 + trial % 2, m=1 + trial % 3
        )
        outs = [
            impl.eval_h_grid(H, coeffs, alphas, betas, gammas, x, w)
            for impl in impls.values()
        ]
        assert np.abs(outs[0] - outs[1]).max() < 1e-13 * max(1.0, np.abs(outs[0]).max())


def test_picard_solve_parity():
    impls = implementations()
    if len(impls) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(1)
    size = 64
    hilb = np.asarray(hilbert_matrix(size))
    for _ in range(5):
        H, coeffs, alphas, betas, gammas, _, w = _random_problem(rng, size=size)
        x = rng.uniform(-0.05, 0.05, 1)
        u0 = np.tile(x, (size, 1))
        results = [
            impl.picard_solve(
                H, coeffs, alphas, betas, gammas, w, x, u0, hilb,
                1.0, 1e-12, 100, 10.0,
            )
            for impl in impls.values()
        ]
        (u_a, it_a, ch_a, esc_a), (u_b, it_b, ch_b, esc_b) = results
        assert esc_a == esc_b
        assert it_a == it_b
        assert np.abs(u_a - u_b).max() < 1e-12


def test_picard_escape_parity():
    impls = implementations()
    if len(impls) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(2)
    size = 32
    hilb = np.asarray(hilbert_matrix(size))
    H = np.ones((1, 1, 1), dtype=complex)
    empty = np.zeros((0, 1))
    w = np.full((size, 1), 0.4 + 0j)
    x = np.array([0.2])
    u0 = np.tile(x, (size, 1))
    for impl in impls.values():
        _, _, _, escaped = impl.picard_solve(
            H, empty.astype(complex), empty.astype(np.int64),
            empty.astype(np.int64), empty.astype(np.int64),
            w, x, u0, hilb, 1.0, 1e-12, 50, 0.3,
        )
        assert escaped
