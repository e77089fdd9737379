"""Solver kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly; the
pure-numpy module is the fallback and the reference implementation. Set the
environment variable ``CRDISCS_PURE=1`` before import to force the fallback
(useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("CRDISCS_PURE", "").strip() not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

eval_h_grid = _impl.eval_h_grid
picard_solve = _impl.picard_solve


def backend_name() -> str:
    return BACKEND


def implementations() -> dict:
    """All importable backends, keyed by name (for parity tests/benchmarks)."""
    table = {"pure": _pure}
    try:
        from . import _fast

        table["compiled"] = _fast
    except ImportError:
        pass
    return table
