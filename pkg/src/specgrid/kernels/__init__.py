"""Kernel backend selection.

The compiled Cython backend is preferred when present; the pure-numpy
backend is the fallback.  Set SPECGRID_BACKEND=python or
SPECGRID_BACKEND=compiled to force one (forcing "compiled" raises if the
extension is not built).  Both backends expose the same three functions
with identical pivot semantics, so results do not depend on the choice.
"""

from __future__ import annotations

import os

from . import pure

_requested = os.environ.get("SPECGRID_BACKEND")
if _requested not in (None, "", "compiled", "python"):
    raise ImportError(
        f"SPECGRID_BACKEND must be 'compiled' or 'python', got {_requested!r}"
    )

if _requested == "python":
    _impl = pure
    BACKEND_NAME = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND_NAME = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = pure
        BACKEND_NAME = "python"

pd_test = _impl.pd_test
smin_exceeds_gram = _impl.smin_exceeds_gram
pseudospec_mask = _impl.pseudospec_mask

__all__ = [
    "BACKEND_NAME",
    "pd_test",
    "smin_exceeds_gram",
    "pseudospec_mask",
    "pure",
]
