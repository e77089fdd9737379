"""Built-in boundary-value functions for extension experiments.

Oracles stand in for CR functions on the manifold minus the singular set:
each takes a stack of ambient points (S, n) and returns (S,) complex values.
They are restrictions of globally defined holomorphic or rational functions,
so the Cauchy mean over an attached disc boundary must reproduce the value
at the disc center.
"""

from __future__ import annotations

import numpy as np


class OracleEvaluationError(RuntimeError):
    """The oracle could not be evaluated at a boundary sample."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


def constant_oracle(value=1.0):
    value = complex(value)

    def f(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        return np.full(pts.shape[0], value, dtype=complex)

    f.name = f"constant({value})"
    return f


def coordinate_oracle(index: int = 0):
    def f(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        return pts[:, index].copy()

    f.name = f"coordinate({index})"
    return f


def polynomial_oracle(terms):
    """Polynomial in the ambient coordinates: terms are (coeff, exponents)."""
    parsed = []
    for coeff, exps in terms:
        parsed.append((complex(coeff), tuple(int(e) for e in exps)))

    def f(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.zeros(pts.shape[0], dtype=complex)
        for coeff, exps in parsed:
            term = np.full(pts.shape[0], coeff, dtype=complex)
            for i, e in enumerate(exps):
                if e:
                    term = term * pts[:, i] ** e
            out += term
        return out

    f.name = f"polynomial({len(parsed)} terms)"
    return f


def reciprocal_affine_oracle(linear, constant=0.0, singular_tol: float = 1e-12):
    """f = 1 / (constant + linear . coords); raises near the polar set."""
    linear = np.asarray(linear, dtype=complex)
    constant = complex(constant)

    def f(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        denom = constant + pts @ linear
        bad = np.abs(denom) < singular_tol
        if bad.any():
            idx = int(np.argmax(bad))
            raise OracleEvaluationError(
                f"affine denominator vanished at boundary sample {idx}", sample_index=idx
            )
        return 1.0 / denom

    f.name = "reciprocal-affine"
    return f


def get_oracle(name: str, params: dict | None = None):
    """Resolve a named oracle from CLI/JSON parameters."""
    params = params or {}
    if name == "constant":
        return constant_oracle(_as_complex(params.get("value", 1.0)))
    if name == "coordinate":
        return coordinate_oracle(int(params.get("index", 0)))
    if name == "polynomial":
        terms = [
            (_as_complex(t["coefficient"]), t["exponents"]) for t in params["terms"]
        ]
        return polynomial_oracle(terms)
    if name == "reciprocal-affine":
        linear = [_as_complex(c) for c in params["linear"]]
        return reciprocal_affine_oracle(linear, _as_complex(params.get("constant", 0.0)))
    raise ValueError(f"unknown oracle {name!r}")


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)
