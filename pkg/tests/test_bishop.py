import numpy as np
import pytest

from crdiscs import (
    BishopConvergenceError,
    CircleGrid,
    CRGraphManifold,
    DiscFamilyParams,
    DomainEscapeError,
    FourierSeries,
    Monomial,
    QuadricForm,
    SolverParams,
    closed_form_G,
    disc_center,
    disc_residual,
    solve_bishop,
)


def _family(dirs, scales, x=0.0, **kw):
    return DiscFamilyParams([x], dirs, scales, t0=kw.pop("t0", 0.0), **kw)


def test_flat_manifold_gives_constant_disc(solver128):
    flat = CRGraphManifold(2, 1, QuadricForm.zero(1, 1))
    disc = solve_bishop(flat, _family([[1.0]], [0.2]), [0.4], solver128)
    assert np.allclose(disc.G.analytic_part().synthesize(), 0.4)
    assert disc.residuals.iterations <= 2
    assert disc.residuals.boundary_residual < 1e-12
    assert disc.residuals.analyticity_residual < 1e-12


def test_lewy_single_mode_closed_form(lewy, solver128):
    disc = solve_bishop(lewy, _family([[1.0]], [0.1]), [0.0], solver128)
    assert np.allclose(disc.G.coefficient(0), 0.01j)
    assert np.allclose(disc_center(disc), [0.01j, 0.0])


def test_lewy_zero_w_any_x(lewy, solver128):
    disc = solve_bishop(lewy, _family([[1.0]], [0.0]), [0.17], solver128)
    assert np.allclose(disc.G.analytic_part().synthesize(), 0.17)
    assert np.allclose(disc_center(disc), [0.17, 0.0])


def test_two_mode_center_formula(lewy, solver128):
    tau = 0.15
    disc = solve_bishop(lewy, _family([[1.0], [1.0]], [tau, tau]), [0.0], solver128)
    assert np.allclose(disc_center(disc), [2j * tau**2, 0.0])
    assert np.allclose(disc.G.coefficient(1), 2j * tau**2)


def test_matches_closed_form_coefficientwise(lewy, solver128):
    rng = np.random.default_rng(11)
    q = lewy.quadric
    for _ in range(25):
        N = int(rng.integers(1, 5))
        dirs = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
        dirs /= np.abs(dirs)
        scales = rng.uniform(0.02, 0.1, N)
        x = rng.uniform(-0.05, 0.05, 1)
        fam = DiscFamilyParams(x, dirs, scales, t0=0.0)
        disc = solve_bishop(lewy, fam, x, solver128)
        ref = closed_form_G(q, fam, solver128.grid)
        for k in range(N + 1):
            assert np.abs(disc.G.analytic_part().coefficient(k) - ref.coefficient(k)).max() < 1e-8


def test_re_g_zero_pinned_exactly(lewy_perturbed, solver128):
    disc = solve_bishop(lewy_perturbed, _family([[1.0]], [0.1]), [0.03], solver128)
    assert disc.residuals.center_residual <= 1e-12
    assert np.allclose(disc.G.coefficient(0).real, 0.03)


def test_boundary_on_manifold_fine_grid(lewy_perturbed, solver128):
    disc = solve_bishop(lewy_perturbed, _family([[1.0]], [0.12]), [0.0], solver128)
    diags = disc_residual(disc, lewy_perturbed)
    assert diags.boundary_residual < 1e-9


def test_uniqueness_probe(lewy_perturbed, solver128):
    fam = _family([[1.0]], [0.1])
    d1 = solve_bishop(lewy_perturbed, fam, [0.0], solver128)
    rng = np.random.default_rng(12)
    u0 = np.zeros((solver128.grid.size, 1)) + 0.01 * rng.standard_normal(
        (solver128.grid.size, 1)
    )
    d2 = solve_bishop(lewy_perturbed, fam, [0.0], solver128, u0=u0)
    u_a = d1.G.analytic_part().synthesize().real
    u_b = d2.G.analytic_part().synthesize().real
    assert np.abs(u_a - u_b).max() < 10 * solver128.tolerance


def test_iterations_monotone_in_scale(lewy_perturbed, solver128):
    fam_big = _family([[1.0]], [0.2])
    fam_small = _family([[1.0]], [0.1])
    d_big = solve_bishop(lewy_perturbed, fam_big, [0.0], solver128)
    d_small = solve_bishop(lewy_perturbed, fam_small, [0.0], solver128)
    assert d_small.residuals.iterations <= d_big.residuals.iterations


def test_injected_antiholomorphic_defect(lewy, solver128):
    disc = solve_bishop(lewy, _family([[1.0]], [0.1]), [0.0], solver128)
    bins = np.zeros((solver128.grid.size, 1), dtype=complex)
    bins[-1, 0] = 1e-3  # frequency -1
    g_bad = FourierSeries(disc.G._bins + bins, solver128.grid)
    from crdiscs import AttachedDisc

    bad = AttachedDisc(disc.W, g_bad, disc.base_x, disc.residuals)
    diags = disc_residual(bad, lewy)
    assert abs(diags.analyticity_residual - 1e-3) < 1e-10


def test_domain_escape_raises():
    small = CRGraphManifold(2, 1, QuadricForm.scalar(1), domain_radius=0.05)
    with pytest.raises(DomainEscapeError):
        solve_bishop(small, _family([[1.0]], [0.2]), [0.0], SolverParams(CircleGrid(64)))


def test_nonconvergence_reports():
    # huge x-coupling over a nonconstant |W|^2 makes the iteration expansive
    terms = (Monomial([40.0], (1,), (1,), (1,)),)
    wild = CRGraphManifold(2, 1, QuadricForm.scalar(1), terms, domain_radius=50.0)
    params = SolverParams(CircleGrid(64), max_iterations=30)
    with pytest.raises((BishopConvergenceError, DomainEscapeError)):
        solve_bishop(wild, _family([[1.0], [1.0]], [0.7, 0.7], t0=0.0), [0.6], params)


def test_w_series_input_equivalent(lewy, solver128):
    fam = _family([[1.0]], [0.1])
    d1 = solve_bishop(lewy, fam, [0.0], solver128)
    d2 = solve_bishop(lewy, fam.w_series(solver128.grid), [0.0], solver128)
    assert np.abs(d1.G._bins - d2.G._bins).max() < 1e-15


def test_solver_params_validation():
    with pytest.raises(ValueError):
        SolverParams(CircleGrid(64), damping=0.0)
    with pytest.raises(ValueError):
        SolverParams(CircleGrid(64), tolerance=-1.0)
