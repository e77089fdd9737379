"""Pure-numpy implementations of the solver hot kernels.

Reference semantics for the compiled extension: given the same inputs both
backends must agree to floating-point roundoff. Kept dependency-free so the
package works without a C toolchain.
"""

from __future__ import annotations

import numpy as np


def eval_h_grid(hmats, coeffs, alphas, betas, gammas, x, w):
    """Evaluate h = quadric + monomials on row-stacked samples (x, w)."""
    wb = np.conj(w)
    out = np.einsum("ljk,nj,nk->nl", hmats, w, wb).real
    nterms = coeffs.shape[0]
    for t in range(nterms):
        mono = np.ones(x.shape[0], dtype=complex)
        for i in range(alphas.shape[1]):
            a = alphas[t, i]
            if a:
                mono = mono * x[:, i] ** a
        for j in range(betas.shape[1]):
            b = betas[t, j]
            if b:
                mono = mono * w[:, j] ** b
            g = gammas[t, j]
            if g:
                mono = mono * wb[:, j] ** g
        out += np.real(mono[:, None] * coeffs[t][None, :])
    return out


def picard_solve(
    hmats,
    coeffs,
    alphas,
    betas,
    gammas,
    w_bnd,
    x,
    u0,
    hilb,
    damping,
    tol,
    max_iter,
    domain_radius,
):
    """Damped fixed-point iteration u <- (1-delta) u + delta (x - T h(u, W)).

    Returns (u, iterations, last_change, escaped). ``escaped`` is set when an
    iterate leaves the graph domain; convergence is ``last_change < tol``.
    """
    u = np.array(u0, dtype=float, copy=True)
    wnorm2 = np.sum(np.abs(w_bnd) ** 2, axis=1)
    r2 = domain_radius * domain_radius * (1.0 + 1e-12)
    change = np.inf
    for it in range(1, max_iter + 1):
        if np.any(np.sum(u * u, axis=1) + wnorm2 > r2):
            return u, it - 1, change, True
        h = eval_h_grid(hmats, coeffs, alphas, betas, gammas, u, w_bnd)
        tu = hilb @ h
        unew = (1.0 - damping) * u + damping * (x[None, :] - tu)
        change = float(np.abs(unew - u).max())
        u = unew
        if change < tol:
            break
    if np.any(np.sum(u * u, axis=1) + wnorm2 > r2):
        return u, it, change, True
    return u, it, change, False
