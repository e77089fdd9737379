# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled solver kernels: graph-height evaluation and the damped
fixed-point loop, fused to avoid per-iteration Python overhead. The circle
transform is applied as a dense BLAS matvec inside the loop.

Must match crdiscs._kernels._pure semantics to floating-point roundoff.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef void _eval_h_into(
    const double complex[:, :, ::1] hmats,
    const double complex[:, ::1] coeffs,
    const long[:, ::1] alphas,
    const long[:, ::1] betas,
    const long[:, ::1] gammas,
    const double[:, ::1] x,
    const double complex[:, ::1] w,
    double[:, ::1] out,
) nogil:
    # explicit real/imaginary arithmetic: keeps the inner loops free of
    # libgcc complex-multiply calls
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = hmats.shape[0]
    cdef Py_ssize_t m = hmats.shape[1]
    cdef Py_ssize_t nterms = coeffs.shape[0]
    cdef Py_ssize_t i, l, j, k, t
    cdef double acc, hr, hi, cr, ci
    cdef double mr, mi, tr, ti, br, bi, p
    cdef long e, step
    for i in range(n):
        for l in range(d):
            acc = 0.0
            for j in range(m):
                for k in range(m):
                    hr = hmats[l, j, k].real
                    hi = hmats[l, j, k].imag
                    # Re(H w_j conj(w_k))
                    cr = w[i, j].real * w[i, k].real + w[i, j].imag * w[i, k].imag
                    ci = w[i, j].imag * w[i, k].real - w[i, j].real * w[i, k].imag
                    acc += hr * cr - hi * ci
            out[i, l] = acc
        for t in range(nterms):
            mr = 1.0
            mi = 0.0
            for j in range(d):
                e = alphas[t, j]
                if e:
                    p = 1.0
                    for step in range(e):
                        p *= x[i, j]
                    mr *= p
                    mi *= p
            for j in range(m):
                e = betas[t, j]
                br = w[i, j].real
                bi = w[i, j].imag
                for step in range(e):
                    tr = mr * br - mi * bi
                    mi = mr * bi + mi * br
                    mr = tr
                e = gammas[t, j]
                for step in range(e):
                    tr = mr * br + mi * bi
                    mi = mi * br - mr * bi
                    mr = tr
            for l in range(d):
                out[i, l] += mr * coeffs[t, l].real - mi * coeffs[t, l].imag


def eval_h_grid(hmats, coeffs, alphas, betas, gammas, x, w):
    hmats = np.ascontiguousarray(hmats, dtype=complex)
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    alphas = np.ascontiguousarray(alphas, dtype=np.int64)
    betas = np.ascontiguousarray(betas, dtype=np.int64)
    gammas = np.ascontiguousarray(gammas, dtype=np.int64)
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=complex)
    out = np.empty((x.shape[0], hmats.shape[0]), dtype=float)
    _eval_h_into(hmats, coeffs, alphas, betas, gammas, x, w, out)
    return out


cdef int _escaped(const double[:, ::1] U, const double[::1] WN2, double r2) nogil:
    cdef Py_ssize_t i, l
    cdef double s
    for i in range(U.shape[0]):
        s = WN2[i]
        for l in range(U.shape[1]):
            s += U[i, l] * U[i, l]
        if s > r2:
            return 1
    return 0


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
    double damping,
    double tol,
    long max_iter,
    double domain_radius,
):
    hmats = np.ascontiguousarray(hmats, dtype=complex)
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    alphas = np.ascontiguousarray(alphas, dtype=np.int64)
    betas = np.ascontiguousarray(betas, dtype=np.int64)
    gammas = np.ascontiguousarray(gammas, dtype=np.int64)
    w_arr = np.ascontiguousarray(w_bnd, dtype=complex)
    x_arr = np.ascontiguousarray(x, dtype=float)
    hilb_arr = np.ascontiguousarray(hilb, dtype=float)
    u = np.array(u0, dtype=float, copy=True, order="C")

    cdef const double complex[:, :, ::1] H = hmats
    cdef const double complex[:, ::1] CF = coeffs
    cdef const long[:, ::1] AL = alphas
    cdef const long[:, ::1] BE = betas
    cdef const long[:, ::1] GA = gammas
    cdef const double complex[:, ::1] W = w_arr
    cdef const double[:, ::1] TH = hilb_arr
    cdef const double[::1] X = x_arr
    cdef double[:, ::1] U = u

    cdef Py_ssize_t n = U.shape[0]
    cdef Py_ssize_t d = U.shape[1]
    cdef Py_ssize_t i, l
    cdef long completed = 0
    cdef double change = np.inf
    cdef double r2 = domain_radius * domain_radius * (1.0 + 1e-12)
    cdef double s, diff
    cdef int escaped = 0

    hbuf = np.empty((n, d), dtype=float)
    tbuf = np.empty((n, d), dtype=float)
    wn2 = np.sum(np.abs(w_arr) ** 2, axis=1)
    cdef double[:, ::1] HB = hbuf
    cdef double[:, ::1] TU = tbuf
    cdef const double[::1] WN2 = wn2

    # TU = TH @ HB via dgemm on the transposed (column-major) views:
    # TU^T (d x n, Fortran) = HB^T (d x n) * TH^T (n x n)
    cdef int bm = <int> d
    cdef int bn = <int> n
    cdef int bk = <int> n
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef char trans = b'N'
    cdef double* th_ptr = <double*> <void*> &TH[0, 0]
    cdef double* hb_ptr = &HB[0, 0]
    cdef double* tu_ptr = &TU[0, 0]

    with nogil:
        while completed < max_iter:
            if _escaped(U, WN2, r2):
                escaped = 1
                break
            _eval_h_into(H, CF, AL, BE, GA, U, W, HB)
            completed += 1
            dgemm(&trans, &trans, &bm, &bn, &bk, &one, hb_ptr, &bm,
                  th_ptr, &bk, &zero, tu_ptr, &bm)
            change = 0.0
            for i in range(n):
                for l in range(d):
                    s = (1.0 - damping) * U[i, l] + damping * (X[l] - TU[i, l])
                    diff = s - U[i, l]
                    if diff < 0:
                        diff = -diff
                    if diff > change:
                        change = diff
                    TU[i, l] = s
            for i in range(n):
                for l in range(d):
                    U[i, l] = TU[i, l]
            if change < tol:
                break
        if not escaped and _escaped(U, WN2, r2):
            escaped = 1

    return u, int(completed), float(change), bool(escaped)
