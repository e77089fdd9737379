import numpy as np
import pytest

from crdiscs import (
    DiscFamilyParams,
    QuadricForm,
    build_matrix,
    build_P,
    numerical_rank,
    patch_over_circle,
    ranks_on_circle,
    realified_stack,
    search_max_rank_at,
    verify_submersion,
)
Q1 = QuadricForm.scalar(1)


def _draw(rng, m_dim=1, n_min=2, n_max=6):
    N = int(rng.integers(n_min, n_max + 1))
    dirs = rng.standard_normal((N, m_dim)) + 1j * rng.standard_normal((N, m_dim))
    scales = rng.uniform(0.1, 1.0, N)
    a0 = rng.standard_normal(m_dim) + 1j * rng.standard_normal(m_dim)
    return DiscFamilyParams(
        np.zeros(1 if m_dim == 1 else 2), dirs, scales, a0=a0, t0=1.0, family_radius=100.0
    )


def test_build_P_first_column_empty():
    assert np.abs(build_P(Q1, [[1.0], [1.0]], [1.0, 0.7], 1, 1.0)).max() == 0.0


def test_build_P_values_at_one_and_i():
    # unit directions with t_1 = 1: the zeta - 1/zeta combination vanishes at 1
    assert np.abs(build_P(Q1, [[1.0], [1.0]], [1.0, 0.7], 2, 1.0)).max() < 1e-15
    val = build_P(Q1, [[1.0], [1.0]], [1.0, 0.7], 2, 1j)
    assert np.allclose(val, [4j])


def test_build_P_purely_imaginary_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        params = _draw(rng)
        j = int(rng.integers(1, params.N + 1))
        zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))
        val = build_P(
            Q1, params.directions, params.scales, j, zeta, base=(params.a0, params.t0)
        )
        assert np.abs(val.real).max() < 1e-12 * max(1.0, np.abs(val).max())


def test_zero_scales_zero_rows():
    p = DiscFamilyParams([0.0], [[1.0], [1.0j]], [0.0, 0.0], t0=0.0)
    mat = build_matrix(Q1, p, 1.0, "Mprime")
    assert np.abs(mat.complex_matrix[2:, :]).max() == 0.0  # P and center rows


def test_single_column_matrix():
    p = DiscFamilyParams([0.0], [[1.0]], [1.0], t0=0.0, family_radius=10.0)
    mat = build_matrix(Q1, p, 1.0, "Mprime")
    assert np.allclose(mat.complex_matrix.ravel(), [1.0, 1.0, 0.0, 1.0])
    assert np.allclose(mat.realified.ravel(), [1.0, 0.0, 0.0, 1.0])
    # one real column spans one dimension
    assert numerical_rank(mat) == 1


def test_conjugate_row_property():
    rng = np.random.default_rng(1)
    for _ in range(20):
        params = _draw(rng)
        zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))
        mat = build_matrix(Q1, params, zeta, "Mprime").complex_matrix
        assert np.abs(mat[1] - np.conj(mat[0])).max() < 1e-14


def test_rank_equality_of_variants():
    rng = np.random.default_rng(2)
    for _ in range(100):
        params = _draw(rng)
        zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))
        r_m = numerical_rank(build_matrix(Q1, params, zeta, "M"))
        r_mp = numerical_rank(build_matrix(Q1, params, zeta, "Mprime"))
        assert r_m == r_mp


def test_numerical_rank_against_svd_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        params = _draw(rng)
        zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))
        mat = build_matrix(Q1, params, zeta, "Mprime")
        assert numerical_rank(mat, 1e-10) == np.linalg.matrix_rank(mat.realified, tol=None if False else 1e-10 * np.linalg.svd(mat.realified, compute_uv=False)[0])


def test_numerical_rank_trivial_cases():
    assert numerical_rank(np.zeros((4, 3))) == 0
    assert numerical_rank(np.eye(4)) == 4
    with pytest.raises(ValueError):
        numerical_rank(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        numerical_rank(np.eye(3), tol=2.0)


def test_scale_invariance_of_rank():
    rng = np.random.default_rng(4)
    params = _draw(rng, n_min=4)
    zeta = np.exp(0.37j)
    base = numerical_rank(build_matrix(Q1, params, zeta, "Mprime"))
    for lam in (1e-3, 1e-1, 1.0, 10.0):
        pr = params.with_scales(params.scales * lam)
        assert numerical_rank(build_matrix(Q1, pr, zeta, "Mprime")) == base


def test_search_succeeds_on_lewy():
    for zeta in (1.0, 1j, np.exp(0.7j)):
        res = search_max_rank_at(Q1, zeta, budget=10_000, seed=7)
        assert res.success
        assert res.rank == 4
        assert res.N <= 8
        mat = build_matrix(Q1, res.as_params(), zeta, "Mprime")
        assert numerical_rank(mat) == 4


def test_search_fails_zero_quadric():
    res = search_max_rank_at(QuadricForm.zero(1, 1), 1.0, seed=0)
    assert not res.success
    assert "hull" in res.reason


def test_search_fails_line_image(line_quadric):
    res = search_max_rank_at(line_quadric, 1.0, seed=0)
    assert not res.success
    assert "hull" in res.reason


def test_search_rank6_scalar_q_in_c3():
    # n = 3, d = 1: the scalar form |w1|^2 + |w2|^2 has full hull in R^1
    q = QuadricForm(np.eye(2, dtype=complex)[None, :, :])
    res = search_max_rank_at(q, 1.0, budget=10_000, seed=5)
    assert res.success and res.rank == 6


def test_search_rank8_product_quadric(product_quadric):
    res = search_max_rank_at(product_quadric.quadric, np.exp(0.3j), budget=10_000, seed=5)
    assert res.success and res.rank == 8


def test_hull_hypothesis_necessity(line_quadric):
    # with the image on the line {(s, -s)}, the realified center/boundary
    # rows stay in a 2-dim subspace: rank < 2n = 6 for any parameters
    rng = np.random.default_rng(6)
    for _ in range(20):
        N = int(rng.integers(6, 10))
        dirs = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
        scales = rng.uniform(0.1, 1.0, N)
        params = DiscFamilyParams(np.zeros(2), dirs, scales, family_radius=100.0)
        zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))
        mat = build_matrix(line_quadric, params, zeta, "Mprime")
        # center and P rows are proportional to (1, -1)
        assert np.abs(mat.realified[2] + mat.realified[3]).max() < 1e-12
        assert np.abs(mat.realified[4] + mat.realified[5]).max() < 1e-12
        assert numerical_rank(mat) < 6


@pytest.fixture(scope="module")
def lewy_patch():
    return patch_over_circle(Q1, seed=11)


def test_patch_circle_rank_everywhere(lewy_patch):
    params, cone = lewy_patch
    zetas = np.exp(2j * np.pi * np.arange(720) / 720)
    ranks = ranks_on_circle(Q1, params, zetas)
    assert int(ranks.min()) == 4


def test_patch_scale_invariance(lewy_patch):
    params, _ = lewy_patch
    zetas = np.exp(2j * np.pi * np.arange(72) / 72)
    for lam in (1e-3, 1.0, 10.0):
        pr = params.with_scales(params.scales * lam)
        assert int(ranks_on_circle(Q1, pr, zetas).min()) == 4


def test_patch_homogeneity_claim(lewy_patch):
    # rank(M'(a, zeta, lambda t)) = rank(M'(a, zeta, t))
    params, _ = lewy_patch
    zeta = np.exp(1.234j)
    r0 = numerical_rank(build_matrix(Q1, params, zeta, "Mprime"))
    for lam in (-3.0, 0.02, 7.0):
        pr = params.with_scales(params.scales * lam)
        assert numerical_rank(build_matrix(Q1, pr, zeta, "Mprime")) == r0


def test_patch_cone_rays_certified(lewy_patch):
    params, cone = lewy_patch
    rng = np.random.default_rng(13)
    zetas = np.exp(2j * np.pi * np.arange(90) / 90)
    for u in cone.sample_rays(8, rng):
        pr = params.with_scales(u * 0.5 * cone.scale_max)
        assert int(ranks_on_circle(Q1, pr, zetas).min()) == 4


def test_single_sample_cover_lewy():
    # a single circle sample can already hold circle-wide for this quadric
    params, cone = patch_over_circle(Q1, circle_samples=1, seed=3)
    zetas = np.exp(2j * np.pi * np.arange(720) / 720)
    assert int(ranks_on_circle(Q1, params, zetas).min()) == 4


def test_rank_continuity_between_nodes(lewy_patch):
    """Certificate extends between grid nodes once the entry Lipschitz bound
    times the spacing is below half the minimum needed singular value."""
    params, _ = lewy_patch
    npoints = 720
    zetas = np.exp(2j * np.pi * np.arange(npoints) / npoints)
    stack = realified_stack(Q1, params, zetas)
    smin = np.linalg.svd(stack, compute_uv=False)[:, 3].min()
    # theta-derivative bound: differentiating multiplies mode j by j; P-row
    # terms carry |j - k| <= N. Use the Frobenius norm of the formal bound.
    t = params.full_scales
    a = params.full_directions
    Q = np.einsum("ljk,pj,qk->pql", Q1.matrices, a, np.conj(a))
    total = 0.0
    for j in range(1, params.N + 1):
        total += (j * np.linalg.norm(a[j])) ** 2 * 2  # W rows (Re + Im)
        p_bound = sum(
            4.0 * abs(t[k]) * (j - k) * np.abs(Q[j, k]).max() for k in range(j)
        )
        total += p_bound**2
    lipschitz = np.sqrt(total)
    spacing = 2 * np.pi / npoints
    while lipschitz * spacing >= smin / 2:
        npoints *= 2
        spacing = 2 * np.pi / npoints
        zetas = np.exp(2j * np.pi * np.arange(npoints) / npoints)
        assert npoints <= 2**20
    ranks = ranks_on_circle(Q1, params, zetas)
    assert int(ranks.min()) == 4


def test_verify_submersion_fd_matches_exact(lewy, lewy_patch, solver256):
    params, cone = lewy_patch
    rng = np.random.default_rng(14)
    t_list = [0.5 * cone.scale_max * u for u in cone.sample_rays(2, rng)]
    rep = verify_submersion(lewy, params, cone, t_list, zeta_count=16, solver=solver256)
    zetas = np.exp(1j * solver256.grid.angles[:: solver256.grid.size // 16])
    exact = min(
        np.linalg.svd(
            realified_stack(Q1, params.with_scales(t), zetas, "M"), compute_uv=False
        )[:, 3].min()
        for t in t_list
    )
    assert abs(rep.min_sigma - exact) < 1e-6 * max(1.0, exact)
    assert rep.passed


def test_verify_submersion_d2_product(product_quadric, solver256):
    q = product_quadric.quadric
    params, cone = patch_over_circle(q, circle_samples=2, seed=21)
    rng = np.random.default_rng(22)
    t_list = [0.5 * cone.scale_max * u for u in cone.sample_rays(1, rng)]
    x_list = [np.zeros(2)]
    rep = verify_submersion(
        product_quadric, params, cone, t_list, zeta_count=8, x_list=x_list,
        solver=solver256, jobs=2,
    )
    assert rep.passed
    zetas = np.exp(1j * solver256.grid.angles[:: solver256.grid.size // 8])
    exact = np.linalg.svd(
        realified_stack(q, params.with_scales(t_list[0]), zetas, "M"),
        compute_uv=False,
    )[:, 7].min()
    assert abs(rep.min_sigma - exact) < 1e-6 * max(1.0, exact)


def test_verify_submersion_rescale_convergence(lewy_perturbed, lewy_patch, solver256):
    # as the rescaling shrinks the perturbation, the FD sigma approaches the
    # quadric value
    from crdiscs import rescale

    params, cone = lewy_patch
    rng = np.random.default_rng(15)
    t_list = [0.5 * cone.scale_max * u for u in cone.sample_rays(1, rng)]
    zetas = np.exp(1j * solver256.grid.angles[:: solver256.grid.size // 8])
    exact = np.linalg.svd(
        realified_stack(Q1, params.with_scales(t_list[0]), zetas, "M"), compute_uv=False
    )[:, 3].min()
    gaps = []
    for lam in (0.5, 0.1):
        rep = verify_submersion(
            rescale(lewy_perturbed, lam), params, cone, t_list, zeta_count=8,
            solver=solver256,
        )
        gaps.append(abs(rep.min_sigma - exact))
    assert gaps[1] <= gaps[0] + 1e-12
    assert gaps[1] <= 0.2 * exact
