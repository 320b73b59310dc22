"""Spectral approximation by singular-value tests on a lattice grid.

Level n uses the grid of points (a+bi)/n with integer a, b confined to
the closed disk of radius n, and the decision "is lambda kept" is always
the boolean pivot test smin(M - lambda) <= threshold from the kernel
backend, never a comparison against a computed singular value.

gamma1 handles selfadjoint operators (threshold 1/n on the symmetrized
truncation).  gamma2 handles perturbed operators H = T + V: points where
smin(H_n - lambda) <= 1/n, united with gamma1 of the unperturbed part.
Because smin(A) equals smin of the conjugate transpose, testing H_n
alone also covers the adjoint truncation, so no second factorization is
needed.  gamma2_widened is the same sweep with the threshold widened to
3/n; it encloses the Schrodinger frontend's output between gamma2 and
itself.

All outputs are deterministically ordered (lexicographic by real part,
then imaginary part) and independent of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ValidationError
from .operators import (
    DEFAULT_DIMENSION_CAP,
    DecomposedOperator,
    MatrixElementProvider,
    truncate,
    truncate_perturbed,
)


@dataclass(frozen=True)
class Grid:
    """Level-n grid: points (a+bi)/n with a^2 + b^2 <= n^4, sorted."""

    n: int
    points: np.ndarray


@dataclass
class SpectralSet:
    """Finite spectral approximation with its provenance.

    points are sorted lexicographically by (re, im).  info carries the
    level data needed to reproduce the run (k_n, thresholds, and for the
    Schrodinger frontend the sampling resolution and its error bound).
    """

    points: np.ndarray
    n: int
    threshold: float
    algorithm: str
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


def _validated_level(n) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"level n must be an integer >= 1, got {n!r}")
    return int(n)


def grid(n: int) -> Grid:
    """Construct the level-n grid.

    The integer radius bound is exact: a^2 + b^2 <= n^4 with integer
    arithmetic, so boundary points are included reproducibly.
    """
    n = _validated_level(n)
    r2 = n**4
    amax = n**2
    a = np.arange(-amax, amax + 1)
    aa, bb = np.meshgrid(a, a, indexing="ij")
    keep = aa * aa + bb * bb <= r2
    pts = (aa[keep] + 1j * bb[keep]) / n
    return Grid(n=n, points=np.sort(pts))


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Sort complex points lexicographically by (re, im) and drop duplicates."""
    return np.unique(np.asarray(points, dtype=np.complex128))


def member_mask(
    matrix: np.ndarray,
    points: np.ndarray,
    threshold: float,
    workers: int = 1,
) -> np.ndarray:
    """Boolean mask over `points`: smin(matrix - p) <= threshold.

    With workers > 1 the points are split into contiguous chunks handed
    to a thread pool; the per-point results are position-stable, so the
    mask does not depend on the worker count or schedule.
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
    points = np.ascontiguousarray(points, dtype=np.complex128)
    npts = points.shape[0]
    if workers is None:
        workers = 1
    workers = max(1, int(workers))
    if workers == 1 or npts < 2 * workers:
        return kernels.pseudospec_mask(matrix, points, threshold)
    bounds = np.linspace(0, npts, workers + 1, dtype=int)
    chunks = [points[bounds[i] : bounds[i + 1]] for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(lambda c: kernels.pseudospec_mask(matrix, c, threshold), chunks)
        )
    return np.concatenate(parts)


def gamma1(
    p: MatrixElementProvider,
    n: int,
    cap: int = DEFAULT_DIMENSION_CAP,
    workers: int = 1,
) -> SpectralSet:
    """First-order spectral approximation of a selfadjoint operator.

    Keeps the grid points lambda with smin(T_n - lambda) <= 1/n, where
    T_n is the Hermitian-symmetrized truncation.
    """
    n = _validated_level(n)
    if not p.selfadjoint:
        raise ValidationError("gamma1 requires a provider with the selfadjoint flag")
    t_n = truncate(p, n, cap)
    g = grid(n)
    mask = member_mask(t_n, g.points, 1.0 / n, workers)
    return SpectralSet(
        points=g.points[mask],
        n=n,
        threshold=1.0 / n,
        algorithm="gamma1",
        info={"k_n": t_n.shape[0]},
    )


def _perturbed_set(
    h: DecomposedOperator,
    n: int,
    threshold: float,
    algorithm: str,
    cap: int,
    workers: int,
) -> SpectralSet:
    t_n, h_n = truncate_perturbed(h, n, cap)
    g = grid(n)
    mask = member_mask(h_n, g.points, threshold, workers)
    base_mask = member_mask(t_n, g.points, 1.0 / n, workers)
    pts = canonical_order(np.concatenate([g.points[mask], g.points[base_mask]]))
    return SpectralSet(
        points=pts,
        n=n,
        threshold=threshold,
        algorithm=algorithm,
        info={
            "k_n": h_n.shape[0],
            "member_count": int(mask.sum()),
            "base_count": int(base_mask.sum()),
        },
    )


def gamma2(
    h: DecomposedOperator,
    n: int,
    cap: int = DEFAULT_DIMENSION_CAP,
    workers: int = 1,
) -> SpectralSet:
    """Spectral approximation of a relatively compact perturbation H = T + V.

    Grid points with smin(H_n - lambda) <= 1/n, united with gamma1 of
    the unperturbed part.
    """
    n = _validated_level(n)
    return _perturbed_set(h, n, 1.0 / n, "gamma2", cap, workers)


def gamma2_widened(
    h: DecomposedOperator,
    n: int,
    cap: int = DEFAULT_DIMENSION_CAP,
    workers: int = 1,
) -> SpectralSet:
    """gamma2 with the singular-value threshold widened to 3/n.

    Together with gamma2 this brackets the Schrodinger frontend: at each
    level, gamma2 <= gamma3 <= gamma2_widened when all three see the
    same operator.
    """
    n = _validated_level(n)
    return _perturbed_set(h, n, 3.0 / n, "gamma2_widened", cap, workers)


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: explicit request, else SPECGRID_WORKERS, else cpu count."""
    import os

    if requested is not None:
        w = int(requested)
        if w < 1:
            raise ValidationError(f"workers must be >= 1, got {requested}")
        return w
    env = os.environ.get("SPECGRID_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError as exc:
            raise ValidationError(f"SPECGRID_WORKERS must be an int, got {env!r}") from exc
        if w < 1:
            raise ValidationError(f"SPECGRID_WORKERS must be >= 1, got {env!r}")
        return w
    return os.cpu_count() or 1
