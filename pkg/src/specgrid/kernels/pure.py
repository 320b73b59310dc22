"""Pure-numpy kernels: pivoted Cholesky tests for grid membership.

Every spectral set in this package is decided by one primitive: is
A*A - q^2 I positive definite?  That holds iff the smallest singular
value of A exceeds q, and positive definiteness is certified by a
symmetric pivoted factorization whose pivots are all strictly positive.
The pivot threshold is exactly 0.0; a pivot <= 0 means "not positive
definite" and therefore "grid point is a member".

The compiled backend in _core.pyx implements the same three entry
points with identical semantics.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Points per batch in pseudospec_mask; bounds scratch memory at
# roughly chunk * k * k * 16 bytes.
_CHUNK = 4096


def pd_test(b: np.ndarray) -> bool:
    """Return True iff the Hermitian matrix `b` is positive definite.

    Decided by an in-place Cholesky factorization: True iff every pivot
    is strictly positive.  `b` is not modified.
    """
    b = np.asarray(b, dtype=np.complex128)
    k = b.shape[0]
    low = np.zeros((k, k), dtype=np.complex128)
    for j in range(k):
        s = b[j, j].real - np.sum(low[j, :j].real ** 2 + low[j, :j].imag ** 2)
        if s <= 0.0:
            return False
        d = np.sqrt(s)
        low[j, j] = d
        if j + 1 < k:
            low[j + 1 :, j] = (
                b[j + 1 :, j] - low[j + 1 :, :j] @ np.conj(low[j, :j])
            ) / d
    return True


def smin_exceeds_gram(a: np.ndarray, q: float) -> bool:
    """Return True iff the smallest singular value of `a` exceeds `q`."""
    a = np.asarray(a, dtype=np.complex128)
    gram = a.conj().T @ a
    k = a.shape[0]
    gram[np.diag_indices(k)] -= q * q
    return pd_test(gram)


def _batch_pd(bs: np.ndarray) -> np.ndarray:
    """Vectorized Cholesky pivot test over a stack of Hermitian matrices.

    Returns a boolean vector: True where the matrix is positive definite.
    Once a pivot fails for some matrix the remaining arithmetic for it is
    dummy work on safe values; only the flag matters.
    """
    m, k, _ = bs.shape
    low = np.zeros_like(bs)
    ok = np.ones(m, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for j in range(k):
            lj = low[:, j, :j]
            s = bs[:, j, j].real - np.einsum(
                "nm,nm->n", lj, lj.conj()
            ).real
            ok &= s > 0.0
            d = np.sqrt(np.where(s > 0.0, s, 1.0))
            low[:, j, j] = d
            if j + 1 < k:
                c = bs[:, j + 1 :, j] - np.einsum(
                    "nim,nm->ni", low[:, j + 1 :, :j], lj.conj()
                )
                low[:, j + 1 :, j] = c / d[:, None]
    return ok


def pseudospec_mask(t: np.ndarray, lams: np.ndarray, q: float) -> np.ndarray:
    """Membership mask: True where smin(t - lam*I) <= q, per lam.

    Builds (t - lam)^* (t - lam) - q^2 I for a batch of shifts at once
    via the expansion G - lam*T^H - conj(lam)*T + (|lam|^2 - q^2) I and
    runs the batched pivot test.
    """
    t = np.asarray(t, dtype=np.complex128)
    lams = np.asarray(lams, dtype=np.complex128)
    k = t.shape[0]
    gram = t.conj().T @ t
    th = t.conj().T
    eye = np.eye(k)
    out = np.empty(lams.shape[0], dtype=bool)
    for start in range(0, lams.shape[0], _CHUNK):
        lam = lams[start : start + _CHUNK]
        shift = (lam.real**2 + lam.imag**2 - q * q)[:, None, None]
        bs = (
            gram[None, :, :]
            - lam[:, None, None] * th[None, :, :]
            - lam.conj()[:, None, None] * t[None, :, :]
            + shift * eye[None, :, :]
        )
        out[start : start + _CHUNK] = ~_batch_pd(bs)
    return out
