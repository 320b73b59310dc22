"""Independent cross-checks for the grid-sweep pipeline.

The primary algorithms decide membership through pivoted Cholesky
factorizations.  Everything here reaches the same quantities along a
disjoint route: eigenvalues by a cyclic complex Jacobi iteration,
singular values by one-sided Jacobi column orthogonalization, potential
matrix elements by midpoint quadrature, and Schrodinger spectra by a
central-difference discretization.  None of these touch the kernel
backend, so agreement between the two routes is evidence, not
tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algorithms import SpectralSet, grid
from .errors import ValidationError
from .linalg import as_complex_matrix
from .operators import DEFAULT_DIMENSION_CAP, MatrixElementProvider, truncate
from .schrodinger import SchrodingerProblem, basis_values, center_lattice

# Default exclusion width around the membership threshold when comparing
# the primary sweep against the eigenvalue oracle: points whose singular
# value sits within this band of the threshold are legitimate rounding
# territory for either route.
BOUNDARY_GUARD = 1e-9


@dataclass
class OracleReport:
    """Outcome of an oracle computation and its comparison data."""

    method: str
    values: np.ndarray
    resolution: dict = field(default_factory=dict)
    budget: float | None = None
    discrepancy: dict | None = None


# ---------------------------------------------------------------------------
# Dense eigenvalue / singular value solvers (cyclic Jacobi)


def hermitian_eigenvalues(a, tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns them sorted ascending.  Input Hermitianness is enforced up
    to exact symmetrization; the iteration stops once the off-diagonal
    Frobenius mass falls below tol times the matrix norm.
    """
    m = as_complex_matrix(a)
    if not np.allclose(m, m.conj().T, atol=1e-12 * (1 + np.abs(m).max())):
        raise ValidationError("hermitian_eigenvalues needs a Hermitian matrix")
    m = (m + m.conj().T) / 2
    k = m.shape[0]
    if k == 1:
        return np.array([m[0, 0].real])
    scale = max(float(np.linalg.norm(m, "fro")), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(
            max(float(np.sum(np.abs(m) ** 2) - np.sum(np.abs(np.diag(m)) ** 2)), 0.0)
        )
        if off <= tol * scale:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                beta = abs(m[p, q])
                if beta <= 1e-300 or beta <= tol * off / k:
                    continue
                u = m[p, q] / beta
                tau = (m[q, q].real - m[p, p].real) / (2.0 * beta)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns: A <- A U
                col_p = m[:, p].copy()
                col_q = m[:, q].copy()
                m[:, p] = c * col_p - s * np.conj(u) * col_q
                m[:, q] = s * u * col_p + c * col_q
                # rows: A <- U^H A
                row_p = m[p, :].copy()
                row_q = m[q, :].copy()
                m[p, :] = c * row_p - s * u * row_q
                m[q, :] = s * np.conj(u) * row_p + c * row_q
                m[p, q] = 0.0
                m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real
    return np.sort(np.diag(m).real)


def singular_values(a, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """All singular values by one-sided Jacobi column orthogonalization.

    Rotates column pairs until they are pairwise orthogonal relative to
    tol; the singular values are the final column norms, sorted
    ascending.  High relative accuracy for the small values, which is
    exactly where the primary bisection route needs checking.
    """
    m = as_complex_matrix(a).copy()
    k = m.shape[0]
    if k == 1:
        return np.array([abs(m[0, 0])])
    for _ in range(max_sweeps):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                hpp = float(np.sum(m[:, p].real ** 2 + m[:, p].imag ** 2))
                hqq = float(np.sum(m[:, q].real ** 2 + m[:, q].imag ** 2))
                hpq = complex(np.vdot(m[:, p], m[:, q]))
                beta = abs(hpq)
                if beta <= tol * math.sqrt(hpp * hqq) or beta == 0.0:
                    continue
                rotated = True
                u = hpq / beta
                tau = (hqq - hpp) / (2.0 * beta)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = m[:, p].copy()
                col_q = m[:, q].copy()
                m[:, p] = c * col_p - s * np.conj(u) * col_q
                m[:, q] = s * u * col_p + c * col_q
        if not rotated:
            break
    return np.sort(np.linalg.norm(m, axis=0))


def svd_smin(a) -> float:
    """Smallest singular value along the oracle route."""
    return float(singular_values(a)[0])


# ---------------------------------------------------------------------------
# gamma1 oracle and comparison


def gamma1_oracle(
    p: MatrixElementProvider, n: int, cap: int = DEFAULT_DIMENSION_CAP
) -> SpectralSet:
    """gamma1 recomputed via eigenvalue distances instead of pivot tests.

    For Hermitian truncations the smallest singular value of T_n - lambda
    equals the distance from lambda to the eigenvalues, so membership is
    min_j |lambda - mu_j| <= 1/n with mu from the Jacobi eigensolver.
    """
    if not p.selfadjoint:
        raise ValidationError("gamma1_oracle requires a selfadjoint provider")
    t_n = truncate(p, n, cap)
    mu = hermitian_eigenvalues(t_n)
    g = grid(n)
    dist = np.abs(g.points[:, None] - mu[None, :]).min(axis=1)
    mask = dist <= 1.0 / n
    return SpectralSet(
        points=g.points[mask],
        n=int(n),
        threshold=1.0 / n,
        algorithm="gamma1_oracle",
        info={"k_n": t_n.shape[0]},
    )


def gamma1_discrepancy(
    p: MatrixElementProvider,
    n: int,
    cap: int = DEFAULT_DIMENSION_CAP,
    guard: float = BOUNDARY_GUARD,
    workers: int = 1,
) -> OracleReport:
    """Compare gamma1 against gamma1_oracle point by point.

    Grid points whose oracle singular value lies within `guard` of the
    threshold are excluded from the count: there the two routes may
    legitimately round in different directions.
    """
    from .algorithms import gamma1

    primary = gamma1(p, n, cap, workers)
    oracle = gamma1_oracle(p, n, cap)
    only_primary = np.setdiff1d(primary.points, oracle.points)
    only_oracle = np.setdiff1d(oracle.points, primary.points)
    t_n = truncate(p, n, cap)
    eye = np.eye(t_n.shape[0])
    thr = 1.0 / n
    disputed = []
    excluded = 0
    for lam in np.concatenate([only_primary, only_oracle]):
        s = svd_smin(t_n - lam * eye)
        if abs(s - thr) < guard:
            excluded += 1
        else:
            disputed.append(complex(lam))
    return OracleReport(
        method="eigenvalue_distance",
        values=oracle.points,
        resolution={"n": int(n), "k_n": t_n.shape[0]},
        discrepancy={
            "count": len(disputed),
            "points": disputed,
            "excluded_boundary": excluded,
            "primary_count": len(primary.points),
            "oracle_count": len(oracle.points),
        },
    )


# ---------------------------------------------------------------------------
# Finite-difference Schrodinger oracle (1d, diagnostic only)


def fd_schrodinger_1d(
    prob: SchrodingerProblem, halfwidth: float, meshpoints: int
) -> OracleReport:
    """Eigenvalues of the Dirichlet central-difference discretization.

    Solves -u'' + V u on [-halfwidth, halfwidth] with zero boundary
    values on a uniform mesh.  Returns eigenvalues sorted ascending plus
    a two-mesh Richardson error estimate for the lowest one.  This is a
    diagnostic for real-valued 1d potentials, not part of the grid
    pipeline.
    """
    if prob.dimension != 1:
        raise ValidationError("fd_schrodinger_1d handles dimension 1 only")
    if meshpoints < 16:
        raise ValidationError(f"meshpoints must be >= 16, got {meshpoints}")
    if not (math.isfinite(halfwidth) and halfwidth > 0):
        raise ValidationError(f"halfwidth must be finite and > 0, got {halfwidth}")

    def solve(m: int) -> np.ndarray:
        h = 2.0 * halfwidth / (m + 1)
        x = -halfwidth + h * np.arange(1, m + 1)
        v = np.asarray(prob.potential(x[:, None]))
        if np.max(np.abs(v.imag)) > 1e-12 * (1 + np.max(np.abs(v))):
            raise ValidationError("fd_schrodinger_1d handles real potentials only")
        from scipy.linalg import eigh_tridiagonal

        main = 2.0 / h**2 + v.real
        off = np.full(m - 1, -1.0 / h**2)
        return eigh_tridiagonal(main, off, eigvals_only=True)

    w = solve(meshpoints)
    w_coarse = solve(meshpoints // 2)
    # second-order scheme: halving h cuts the error by 4
    richardson = abs(w[0] - w_coarse[0]) / 3.0
    return OracleReport(
        method="central_difference",
        values=w,
        resolution={"meshpoints": int(meshpoints), "halfwidth": float(halfwidth)},
        budget=float(richardson),
    )


# ---------------------------------------------------------------------------
# Quadrature oracle for potential matrix elements


def _midpoint_mesh(prob: SchrodingerProblem, refinement: int):
    """Tensor midpoint nodes over the support box, about 1/refinement apart."""
    axes = []
    weight = 1.0
    for lo, hi in prob.support.intervals:
        cells = max(1, round((hi - lo) * refinement))
        h = (hi - lo) / cells
        axes.append(lo + h * (np.arange(cells) + 0.5))
        weight *= h
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts, weight


def quad_element_oracle(
    k: int, m: int, n: int, prob: SchrodingerProblem, refinement: int
) -> complex:
    """Potential matrix element by midpoint quadrature over the support box.

    Independent of the lattice-sampling construction: different nodes
    (cell midpoints), different weights, no step-function approximation
    of V.  refinement is roughly the inverse cell width.
    """
    if refinement < 2:
        raise ValidationError(f"refinement must be >= 2, got {refinement}")
    centers = center_lattice(n, prob.dimension)
    kk = centers.shape[0]
    if not (0 <= k < kk and 0 <= m < kk):
        raise ValidationError(f"basis indices must lie in [0, {kk}), got ({k}, {m})")
    pts, weight = _midpoint_mesh(prob, refinement)
    vals = np.asarray(prob.potential(pts), dtype=np.complex128)
    e = basis_values(centers[[k, m]], n, pts)
    return complex(np.sum(vals * e[0] * np.conj(e[1])) * weight)


def quad_element_matrix(
    prob: SchrodingerProblem, n: int, refinement: int
) -> np.ndarray:
    """All potential matrix elements at once by midpoint quadrature."""
    if refinement < 2:
        raise ValidationError(f"refinement must be >= 2, got {refinement}")
    centers = center_lattice(n, prob.dimension)
    pts, weight = _midpoint_mesh(prob, refinement)
    vals = np.asarray(prob.potential(pts), dtype=np.complex128)
    e = basis_values(centers, n, pts)
    return np.einsum("ki,i,mi->km", e, vals, np.conj(e)) * weight


def quad_matrix_with_budget(
    prob: SchrodingerProblem, n: int, refinement: int
) -> tuple[np.ndarray, float]:
    """Quadrature element matrix plus a two-refinement error budget.

    Returns the matrix at 2*refinement together with the Frobenius norm
    of its difference from the refinement-level matrix; the norm serves
    as an empirical operator-norm budget for the remaining quadrature
    error.
    """
    coarse = quad_element_matrix(prob, n, refinement)
    fine = quad_element_matrix(prob, n, 2 * refinement)
    budget = float(np.linalg.norm(fine - coarse, "fro"))
    return fine, budget
