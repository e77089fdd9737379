"""Sparse multivariate polynomial arithmetic on exponent dictionaries.

A polynomial is a plain ``dict`` mapping exponent tuples to complex
coefficients. The variable layout is positional and fixed by the caller.
Graph-manifold work uses the layout ``(x_1..x_d, w_1..w_m, wb_1..wb_m)``
where ``wb_j`` stands for the conjugate of ``w_j``; conjugation swaps the
two ``w`` blocks and conjugates coefficients. Ambient holomorphic maps use
the conjugate-free layout ``(z_1..z_d, w_1..w_m)``.

Everything here is exact complex-float arithmetic; truncation is by total
degree only.
"""

from __future__ import annotations

import numpy as np

Poly = dict  # exponent tuple -> complex coefficient


def p_zero() -> Poly:
    return {}


def p_const(value: complex, nvars: int) -> Poly:
    if value == 0:
        return {}
    return {(0,) * nvars: complex(value)}


def p_var(i: int, nvars: int, coeff: complex = 1.0) -> Poly:
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): complex(coeff)}


def p_degree(p: Poly) -> int:
    return max((sum(e) for e in p), default=0)


def p_add(*polys: Poly, out: Poly | None = None) -> Poly:
    acc = {} if out is None else out
    for p in polys:
        for e, c in p.items():
            acc[e] = acc.get(e, 0.0) + c
    return acc


def p_axpy(dst: Poly, src: Poly, scale: complex = 1.0) -> Poly:
    for e, c in src.items():
        dst[e] = dst.get(e, 0.0) + scale * c
    return dst


def p_scale(p: Poly, scale: complex) -> Poly:
    return {e: scale * c for e, c in p.items()}


def p_mul(a: Poly, b: Poly, max_deg: int | None = None) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        da = sum(ea)
        for eb, cb in b.items():
            if max_deg is not None and da + sum(eb) > max_deg:
                continue
            e = tuple(i + j for i, j in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return out


def p_pow(a: Poly, k: int, max_deg: int | None = None) -> Poly:
    if k == 0:
        nv = len(next(iter(a), ()))
        return p_const(1.0, nv) if a else {(): 1.0}
    out = dict(a)
    for _ in range(k - 1):
        out = p_mul(out, a, max_deg)
    return out


def p_truncate(p: Poly, max_deg: int) -> Poly:
    return {e: c for e, c in p.items() if sum(e) <= max_deg}


def p_clean(p: Poly, tol: float = 0.0) -> Poly:
    return {e: c for e, c in p.items() if abs(c) > tol}


def p_conj(p: Poly, d: int, m: int) -> Poly:
    """Complex conjugate in the (x, w, wb) layout: swap w and wb blocks."""
    out: Poly = {}
    for e, c in p.items():
        e2 = e[:d] + e[d + m : d + 2 * m] + e[d : d + m]
        out[e2] = out.get(e2, 0.0) + np.conj(c)
    return out


def p_real(p: Poly, d: int, m: int) -> Poly:
    return p_clean(p_add(p_scale(p, 0.5), p_scale(p_conj(p, d, m), 0.5)))


def p_imag(p: Poly, d: int, m: int) -> Poly:
    return p_clean(p_add(p_scale(p, -0.5j), p_scale(p_conj(p, d, m), 0.5j)))


def p_subst(p: Poly, subs: list[Poly], max_deg: int) -> Poly:
    """Substitute subs[i] for variable i, truncating at total degree max_deg.

    The output lives in the variable layout of the substituted polynomials,
    which may differ in length from the input layout.
    """
    out: Poly = {}
    pow_cache: dict[tuple[int, int], Poly] = {}

    def power(i: int, k: int) -> Poly:
        key = (i, k)
        if key not in pow_cache:
            pow_cache[key] = p_truncate(p_pow(subs[i], k, max_deg), max_deg)
        return pow_cache[key]

    out_nv = None
    for s in subs:
        for key in s:
            out_nv = len(key)
            break
        if out_nv is not None:
            break
    if out_nv is None:
        out_nv = len(subs)
    for e, c in p.items():
        term = p_const(c, out_nv)
        for i, k in enumerate(e):
            if k:
                term = p_mul(term, power(i, k), max_deg)
                if not term:
                    break
        p_axpy(out, term)
    return p_clean(out, 0.0)


def p_eval(p: Poly, values: np.ndarray) -> complex:
    total = 0.0 + 0.0j
    for e, c in p.items():
        v = c
        for i, k in enumerate(e):
            if k:
                v = v * values[i] ** k
        total += v
    return total


def p_linear_part(p: Poly, nvars: int) -> np.ndarray:
    """Coefficients of the degree-1 terms as a length-nvars complex vector."""
    out = np.zeros(nvars, dtype=complex)
    for e, c in p.items():
        if sum(e) == 1:
            out[e.index(1)] += c
    return out


def p_coeff(p: Poly, e: tuple[int, ...]) -> complex:
    return p.get(e, 0.0)


def pv_add(a: list[Poly], b: list[Poly]) -> list[Poly]:
    return [p_add(x, y) for x, y in zip(a, b)]


def pv_subst(ps: list[Poly], subs: list[Poly], max_deg: int) -> list[Poly]:
    return [p_subst(p, subs, max_deg) for p in ps]


def invert_graph_parameter(
    x_polys: list[Poly], d: int, nvars: int, max_deg: int
) -> list[Poly]:
    """Solve X = x' + F(x', rest) for x' as a polynomial in (X, rest).

    ``x_polys`` gives X as polynomials in the layout (x'_1..x'_d, rest...).
    The returned polynomials express x' in the layout (X_1..X_d, rest...),
    reusing the same variable slots. Requires the x'-linear block of X to be
    invertible; raises ``np.linalg.LinAlgError`` otherwise.
    """
    L = np.zeros((d, d), dtype=complex)
    for l in range(d):
        lin = p_linear_part(x_polys[l], nvars)
        L[l, :] = lin[:d]
    Linv = np.linalg.inv(L)

    # Remainder R = X - L x'  (everything but the pure x'-linear block).
    remainder = []
    for l in range(d):
        r = dict(x_polys[l])
        for i in range(d):
            e = [0] * nvars
            e[i] = 1
            e = tuple(e)
            if e in r:
                r[e] -= L[l, i]
        remainder.append(p_clean(r, 0.0))

    # Fixed point x' = Linv (X - R(x', rest)); each pass raises the degree at
    # which the iterate is exact, so max_deg passes suffice.
    allvars = [p_var(i, nvars) for i in range(nvars)]
    current = []
    for i in range(d):
        p = p_zero()
        for l in range(d):
            p_axpy(p, allvars[l], Linv[i, l])
        current.append(p)
    for _ in range(max_deg):
        subs = current + allvars[d:]
        nxt = []
        for i in range(d):
            acc = p_zero()
            for l in range(d):
                r_sub = p_subst(remainder[l], subs, max_deg)
                p_axpy(acc, allvars[l], Linv[i, l])
                p_axpy(acc, r_sub, -Linv[i, l])
            nxt.append(p_clean(acc, 0.0))
        current = nxt
    return [p_truncate(p, max_deg) for p in current]
