"""Analytic discs attached to CR graph manifolds.

Numerical engine for constructing analytic discs with boundary on a generic
CR submanifold of C^n in graph normal form, certifying that the disc-center
map submerges onto a wedge, and demonstrating holomorphic extension past
metrically thin sets via the Cauchy formula on disc families.
"""

from ._kernels import backend_name
from .bishop import (
    AttachedDisc,
    BishopConvergenceError,
    DiscDiagnostics,
    DiscFrame,
    DomainEscapeError,
    SolverParams,
    disc_center,
    disc_residual,
    solve_bishop,
    solve_family,
)
from .circle import (
    CircleGrid,
    FourierSeries,
    analytic_completion,
    evaluate_disc,
    fourier_analyze,
    fourier_synthesize,
    hilbert_matrix,
    hilbert_transform,
)
from .cones import ConeRegion
from .manifolds import (
    CRGraphManifold,
    HoloPolyMap,
    LeviReport,
    Monomial,
    QuadricForm,
    check_normal_form,
    evaluate_h,
    evaluate_h_grid,
    levi_form,
    levi_hull_report,
    normalize_at_point,
    quadric_hull_report,
    quadric_of,
    rescale,
)
from .oracles import (
    OracleEvaluationError,
    constant_oracle,
    coordinate_oracle,
    get_oracle,
    polynomial_oracle,
    reciprocal_affine_oracle,
)
from .quadric import (
    DiscFamilyParams,
    center_map,
    closed_form_G,
    dReG_dt,
    dv0_dt,
    v_center,
)
from .ranks import (
    PatchVerificationError,
    RankMatrix,
    RankSearchResult,
    SubmersionNodeError,
    SubmersionReport,
    build_P,
    build_matrix,
    numerical_rank,
    patch_over_circle,
    ranks_on_circle,
    realified_stack,
    search_max_rank_at,
    verify_submersion,
)
from .wedge import (
    AvoidanceError,
    AvoidanceResult,
    ConsistencyReport,
    ThinSet,
    ThinSetComponent,
    ThinSetError,
    ThinnessScan,
    WedgeCertificate,
    WedgeFitError,
    cauchy_extend,
    consistency_check,
    find_avoiding_disc,
    isotopy_path,
    sweep_centers,
    thinness_scan,
    wedge_decompose,
)

__version__ = "0.1.0"
