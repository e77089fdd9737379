import numpy as np
import pytest

from crdiscs import (
    CircleGrid,
    CRGraphManifold,
    Monomial,
    QuadricForm,
    SolverParams,
)


@pytest.fixture(scope="session")
def lewy():
    """The hypersurface y = |w|^2 in C^2."""
    return CRGraphManifold(2, 1, QuadricForm.scalar(1))


@pytest.fixture(scope="session")
def lewy_perturbed():
    """Lewy plus 0.05 Re(w^3)."""
    terms = (
        Monomial([0.025], (0,), (3,), (0,)),
        Monomial([0.025], (0,), (0,), (3,)),
    )
    return CRGraphManifold(2, 1, QuadricForm.scalar(1), terms)


@pytest.fixture(scope="session")
def product_quadric():
    """q = (|w1|^2, |w2|^2) in C^4 (d = 2)."""
    mats = np.stack(
        [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    )
    return CRGraphManifold(4, 2, QuadricForm(mats))


@pytest.fixture(scope="session")
def line_quadric():
    """Degenerate control: image of q lies on the line {(s, -s)}."""
    mats = np.stack([np.eye(1, dtype=complex), -np.eye(1, dtype=complex)])
    return QuadricForm(mats)


@pytest.fixture(scope="session")
def solver128():
    return SolverParams(CircleGrid(128))


@pytest.fixture(scope="session")
def solver256():
    return SolverParams(CircleGrid(256))
