"""Smallest-singular-value tests on finite complex matrices.

The central primitive is the strict comparison smin(A) > q, decided
without computing smin(A): A*A - q^2 I is positive definite iff the
comparison holds, and positive definiteness is certified by a pivoted
symmetric factorization (all pivots strictly positive, threshold exactly
zero).  smin itself is recovered by bisecting q; set membership in the
rest of the package never goes through the numeric value, only through
the boolean test.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ValidationError

# Bisection bracket width at which smin() stops.
DEFAULT_SMIN_TOL = 1e-10


def as_complex_matrix(a) -> np.ndarray:
    """Validate and convert to a square, finite, C-contiguous complex matrix."""
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValidationError("matrix dimension must be positive")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix entries must be finite")
    return arr


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_complex_matrix(a), "fro"))


def smin_exceeds(a, q: float) -> bool:
    """Return True iff the smallest singular value of `a` is > `q`.

    `q` must be a finite real, >= 0.
    """
    arr = as_complex_matrix(a)
    q = float(q)
    if not np.isfinite(q) or q < 0.0:
        raise ValidationError(f"threshold must be a finite real >= 0, got {q}")
    return kernels.smin_exceeds_gram(arr, q)


def smin(a, tol: float = DEFAULT_SMIN_TOL) -> float:
    """Smallest singular value of `a` by bisection, to within `tol`.

    Brackets with [0, frobenius norm] and bisects on smin_exceeds until
    the bracket is narrower than `tol`; the factorization is recomputed
    at every query point.  The error of the returned midpoint is at most
    tol/2.
    """
    arr = as_complex_matrix(a)
    tol = float(tol)
    if not np.isfinite(tol) or tol <= 0.0:
        raise ValidationError(f"tolerance must be a finite real > 0, got {tol}")
    lo = 0.0
    hi = float(np.linalg.norm(arr, "fro"))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kernels.smin_exceeds_gram(arr, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
