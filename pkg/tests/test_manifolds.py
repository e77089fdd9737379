import numpy as np
import pytest

from crdiscs import (
    CRGraphManifold,
    Monomial,
    QuadricForm,
    check_normal_form,
    evaluate_h,
    levi_form,
    levi_hull_report,
    normalize_at_point,
    quadric_hull_report,
    quadric_of,
    rescale,
)
from crdiscs.manifolds import evaluate_h_grid


# ---------------------------------------------------------------------------
# independent oracle: extrinsic Levi form from finite-difference complex
# Hessians of the defining functions rho_l = h_l(x, w) - y_l
# ---------------------------------------------------------------------------


def _levi_oracle(m, W, step=1e-4):
    n, d = m.n, m.d

    def rho(v_real):
        # v_real packs (Re z, Im z, Re w, Im w)
        x = v_real[:d]
        y = v_real[d : 2 * d]
        w = v_real[2 * d : 2 * d + m.m] + 1j * v_real[2 * d + m.m :]
        return evaluate_h(m, x, w) - y

    dim = 2 * n

    def hess(i, j):
        e_i = np.zeros(dim)
        e_j = np.zeros(dim)
        e_i[i] = step
        e_j[j] = step
        return (
            rho(e_i + e_j) - rho(e_i - e_j) - rho(-e_i + e_j) + rho(-e_i - e_j)
        ) / (4 * step * step)

    # complex coordinates zeta_k: real/imag index pairs in v_real
    re_idx = list(range(d)) + list(range(2 * d, 2 * d + m.m))
    im_idx = list(range(d, 2 * d)) + list(range(2 * d + m.m, 2 * n))
    Wfull = np.concatenate([np.zeros(d, dtype=complex), np.asarray(W, dtype=complex)])
    total = np.zeros(d, dtype=complex)
    for j in range(n):
        for k in range(n):
            h_cc = 0.25 * (
                hess(re_idx[j], re_idx[k])
                + hess(im_idx[j], im_idx[k])
                + 1j * (hess(re_idx[j], im_idx[k]) - hess(im_idx[j], re_idx[k]))
            )
            total += h_cc * Wfull[j] * np.conj(Wfull[k])
    # gradient of rho_l is -e_l in the y-slot; the sign convention puts the
    # value onto the +y normal directions
    return total.real


def test_evaluate_h_origin_is_zero(lewy, lewy_perturbed):
    assert np.allclose(evaluate_h(lewy, [0.0], [0.0]), 0.0)
    assert np.allclose(evaluate_h(lewy_perturbed, [0.0], [0.0]), 0.0)


def test_evaluate_h_lewy_value(lewy):
    assert np.allclose(evaluate_h(lewy, [0.3], [0.5j]), [0.25])


def test_evaluate_h_with_cubic_term():
    # |w|^2 + Re(w^3) at w = 1 gives 1 + 1 = 2, any x
    terms = (Monomial([0.5], (0,), (3,), (0,)), Monomial([0.5], (0,), (0,), (3,)))
    m = CRGraphManifold(2, 1, QuadricForm.scalar(1), terms, domain_radius=3.0)
    for x in (0.0, 0.7, -0.4):
        assert np.allclose(evaluate_h(m, [x], [1.0 + 0j]), [2.0])


def test_evaluate_h_domain_enforced(lewy):
    with pytest.raises(ValueError):
        evaluate_h(lewy, [2.0], [0.0])


def test_evaluate_h_grid_matches_pointwise(lewy_perturbed):
    rng = np.random.default_rng(0)
    xs = rng.uniform(-0.2, 0.2, (20, 1))
    ws = 0.3 * (rng.standard_normal((20, 1)) + 1j * rng.standard_normal((20, 1)))
    grid_vals = evaluate_h_grid(lewy_perturbed, xs, ws)
    for i in range(20):
        assert np.allclose(grid_vals[i], evaluate_h(lewy_perturbed, xs[i], ws[i]))


def test_quadric_form_hermitian_validation():
    with pytest.raises(ValueError):
        QuadricForm(np.array([[[0.0, 1.0], [0.0, 0.0]]], dtype=complex))


def test_quadric_pairing_symmetry():
    rng = np.random.default_rng(1)
    H = rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3))
    q = QuadricForm(0.5 * (H + np.conj(np.swapaxes(H, 1, 2))))
    for _ in range(50):
        a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        assert np.allclose(q(b, np.conj(a)), np.conj(q(a, np.conj(b))))


def test_quadric_diagonal_real_many_draws():
    rng = np.random.default_rng(2)
    H = rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3))
    q = QuadricForm(0.5 * (H + np.conj(np.swapaxes(H, 1, 2))))
    a = rng.standard_normal((10_000, 3)) + 1j * rng.standard_normal((10_000, 3))
    vals = np.einsum("ljk,pj,pk->pl", q.matrices, a, np.conj(a))
    assert np.abs(vals.imag).max() < 1e-12 * max(1.0, np.abs(vals.real).max())


def test_quadric_of_examples(lewy, product_quadric):
    assert np.allclose(quadric_of(lewy).matrices, [[[1.0]]])
    zero = CRGraphManifold(2, 1, QuadricForm.zero(1, 1))
    assert np.allclose(quadric_of(zero).matrices, 0.0)
    mats = quadric_of(product_quadric).matrices
    assert np.allclose(mats[0], np.diag([1.0, 0.0]))
    assert np.allclose(mats[1], np.diag([0.0, 1.0]))


def test_check_normal_form_valid(lewy, lewy_perturbed):
    assert check_normal_form(lewy) == []
    assert check_normal_form(lewy_perturbed) == []


def test_check_normal_form_rejects_pure_quadratic():
    bad = CRGraphManifold(2, 1, QuadricForm.scalar(1), (Monomial([1.0], (0,), (2,), (0,)),))
    report = check_normal_form(bad)
    assert any("d^2w" in v or "w^(2,)" in v for v in report)
    assert report  # non-empty


def test_check_normal_form_allows_x_w2_mixed():
    terms = (Monomial([1.0], (1,), (1,), (1,)),)  # x |w|^2, degree 3
    m = CRGraphManifold(2, 1, QuadricForm.scalar(1), terms)
    assert check_normal_form(m) == []


def test_check_normal_form_flags_unpaired_term():
    bad = CRGraphManifold(2, 1, QuadricForm.scalar(1), (Monomial([1.0], (0,), (3,), (0,)),))
    assert any("conjugate partner" in v for v in check_normal_form(bad))


def test_levi_form_matches_fd_oracle(lewy, lewy_perturbed, product_quadric):
    # frozen from the oracle: q = |w|^2 at W = 1 gives 1
    assert np.allclose(levi_form(lewy, [1.0]), [1.0])
    rng = np.random.default_rng(3)
    for m in (lewy, lewy_perturbed, product_quadric):
        for _ in range(3):
            W = rng.standard_normal(m.m) + 1j * rng.standard_normal(m.m)
            expected = _levi_oracle(m, W)
            assert np.abs(levi_form(m, W) - expected).max() < 1e-6


def test_levi_hull_lewy_has_interior(lewy):
    rep = levi_hull_report(lewy, 512, seed=0)
    assert rep.hull_has_interior
    assert rep.witness_cone is not None


def test_levi_hull_zero_quadric_degenerate():
    zero = CRGraphManifold(2, 1, QuadricForm.zero(1, 1))
    rep = levi_hull_report(zero, 256, seed=0)
    assert not rep.hull_has_interior
    assert rep.witness_cone is None


def test_levi_hull_line_image_degenerate(line_quadric):
    rep = quadric_hull_report(line_quadric, 512, seed=0)
    assert not rep.hull_has_interior
    # values really do lie on the line {(s, -s)}
    assert np.abs(rep.values[:, 0] + rep.values[:, 1]).max() < 1e-12


def test_levi_hull_product_quadric_interior(product_quadric):
    rep = levi_hull_report(product_quadric, 4096, seed=1)
    assert rep.hull_has_interior
    assert rep.witness_cone is not None


def test_witness_cone_membership_certificate(product_quadric):
    # 50 random rays inside the witness cone are convex combinations of
    # sampled values: certified via the hull inequalities
    from scipy.spatial import ConvexHull

    rep = levi_hull_report(product_quadric, 4096, seed=2)
    cone = rep.witness_cone
    hull = ConvexHull(rep.values)
    A, b = hull.equations[:, :-1], hull.equations[:, -1]
    rng = np.random.default_rng(3)
    rays = cone.sample_rays(50, rng)
    for u in rays:
        point = 0.5 * cone.scale_max * u
        assert (A @ point + b).max() <= 1e-8


def test_rescale_quadric_invariant(lewy):
    m2 = rescale(lewy, 0.37)
    assert np.allclose(m2.quadric.matrices, lewy.quadric.matrices)
    assert m2.perturbation == ()


def test_rescale_cubic_coefficient():
    m = CRGraphManifold(
        2, 1, QuadricForm.scalar(1),
        (Monomial([0.5], (0,), (3,), (0,)), Monomial([0.5], (0,), (0,), (3,))),
    )
    m2 = rescale(m, 0.1)
    assert np.allclose(m2.perturbation[0].coefficient, 0.05)


def test_rescale_quartic_coefficient():
    m = CRGraphManifold(
        2, 1, QuadricForm.scalar(1), (Monomial([1.0], (2,), (1,), (1,)),)
    )
    m2 = rescale(m, 0.5)
    assert np.allclose(m2.perturbation[0].coefficient, 0.25)


def test_rescale_round_trip_exact():
    m = CRGraphManifold(
        2, 1, QuadricForm.scalar(1),
        (Monomial([0.3], (0,), (3,), (0,)), Monomial([0.3], (0,), (0,), (3,)),
         Monomial([0.7], (2,), (1,), (1,))),
    )
    back = rescale(rescale(m, 0.5), 2.0)
    for t1, t2 in zip(m.perturbation, back.perturbation):
        assert np.array_equal(t1.coefficient, t2.coefficient)
    assert back.domain_radius == m.domain_radius


def test_rescale_rejects_nonpositive(lewy):
    with pytest.raises(ValueError):
        rescale(lewy, 0.0)
    with pytest.raises(ValueError):
        rescale(lewy, -1.0)


def test_normalize_at_origin_identity(lewy):
    phi, m2 = normalize_at_point(lewy, ([0.0], [0.0]))
    assert phi.is_identity()
    assert np.allclose(m2.quadric.matrices, lewy.quadric.matrices)
    assert m2.perturbation == ()


def test_normalize_lewy_translation(lewy):
    phi, m2 = normalize_at_point(lewy, ([0.2], [0.0]))
    # pure translation z -> z - 0.2
    z = np.array([0.37 + 0.11j, 0.05 - 0.02j])
    assert np.allclose(phi.apply(z), [z[0] - 0.2, z[1]])
    assert np.allclose(m2.quadric.matrices, [[[1.0]]])


def test_normalize_lewy_shear(lewy):
    wp = 0.3 + 0.1j
    phi, m2 = normalize_at_point(lewy, ([0.0], [wp]))
    z = np.array([0.07 + 0.21j, 0.33 + 0.04j])
    expected0 = z[0] - 1j * abs(wp) ** 2 - 2j * np.conj(wp) * (z[1] - wp)
    out = phi.apply(z)
    assert np.allclose(out[0], expected0)
    assert np.allclose(out[1], z[1] - wp)
    assert np.allclose(m2.quadric.matrices, [[[1.0]]])
    assert check_normal_form(m2) == []


@pytest.mark.parametrize("point", [([0.1], [0.25 - 0.15j]), ([-0.05], [0.1 + 0.2j])])
def test_normalize_perturbed_recentred_graph(lewy_perturbed, point):
    phi, mloc = normalize_at_point(lewy_perturbed, point, degree=5)
    assert check_normal_form(mloc) == []
    rng = np.random.default_rng(4)
    x_p = np.asarray(point[0])
    w_p = np.asarray(point[1], dtype=complex)
    for _ in range(10):
        xt = x_p + rng.normal(0, 0.02, 1)
        wt = w_p + rng.normal(0, 0.02) + 1j * rng.normal(0, 0.02)
        amb = lewy_perturbed.embed(xt, [wt])
        img = phi.apply(amb)
        h_new = evaluate_h(mloc, img[:1].real, img[1:])
        assert np.abs(img[:1].imag - h_new).max() < 1e-12


def test_normalize_point_too_far(lewy):
    with pytest.raises(ValueError):
        normalize_at_point(lewy, ([0.9], [0.0]))


def test_normalize_with_x_gradient():
    # x-coupled term gives a nonzero x-gradient at w_p != 0, exercising the
    # full linear normalization (C = I - i a with a != 0) and the series
    # inversion; the residual is pure jet truncation and falls with degree
    terms = (Monomial([0.3], (1,), (1,), (1,)),)
    m = CRGraphManifold(2, 1, QuadricForm.scalar(1), terms)
    wp = 0.3 - 0.2j
    worsts = []
    for degree in (4, 6, 8):
        phi, mloc = normalize_at_point(m, ([0.1], [wp]), degree=degree)
        assert check_normal_form(mloc) == []
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(10):
            xt = 0.1 + rng.normal() * 0.02
            wt = wp + (rng.normal() + 1j * rng.normal()) * 0.02
            amb = m.embed([xt], [wt])
            img = phi.apply(amb)
            res = np.abs(img[:1].imag - evaluate_h(mloc, img[:1].real, img[1:])).max()
            worst = max(worst, float(res))
        worsts.append(worst)
    assert worsts[0] < 1e-7
    assert worsts[1] < 1e-2 * worsts[0]
    assert worsts[2] < 1e-14


def test_normalize_d2_with_x_coupling(product_quadric):
    terms = (Monomial([0.2, 0.1], (1, 0), (1, 0), (1, 0)),)
    m = CRGraphManifold(4, 2, product_quadric.quadric, terms)
    p = ([0.05, -0.03], [0.2 + 0.1j, -0.15j])
    phi, mloc = normalize_at_point(m, p, degree=6)
    assert check_normal_form(mloc) == []
    rng = np.random.default_rng(2)
    for _ in range(10):
        xt = np.array(p[0]) + rng.normal(0, 0.01, 2)
        wt = np.array(p[1]) + rng.normal(0, 0.01, 2) + 1j * rng.normal(0, 0.01, 2)
        amb = m.embed(xt, wt)
        img = phi.apply(amb)
        res = np.abs(img[:2].imag - evaluate_h(mloc, img[:2].real, img[2:])).max()
        assert res < 1e-10


def test_normalize_coefficients_continuous_in_p(lewy_perturbed):
    # recentered data should move continuously with the base point
    base = ([0.1], [0.2 + 0.1j])
    _, m0 = normalize_at_point(lewy_perturbed, base, degree=4)
    _, m1 = normalize_at_point(lewy_perturbed, ([0.1 + 1e-5], [0.2 + 0.1j]), degree=4)
    dq = np.abs(m0.quadric.matrices - m1.quadric.matrices).max()
    assert dq < 1e-3
    t0 = {t.key(): t.coefficient for t in m0.perturbation}
    t1 = {t.key(): t.coefficient for t in m1.perturbation}
    for key in set(t0) & set(t1):
        assert np.abs(t0[key] - t1[key]).max() < 1e-3
