"""specgrid: one-limit spectral computation on square lattice grids.

Computes approximations of operator spectra that converge as a single
limit of finite arithmetic computations: truncate the operator, sweep a
lattice grid of spectral parameters, and keep the points where the
smallest singular value of the shifted truncation falls below a level-
dependent threshold.  Frontends cover selfadjoint operators given by
matrix elements, relatively compact perturbations of them, and
Schrodinger operators -Laplacian + V with compactly supported C^1
potentials.  Independent oracles and set-distance instrumentation
support validating every step.
"""

from .algorithms import (
    Grid,
    SpectralSet,
    gamma1,
    gamma2,
    gamma2_widened,
    grid,
    resolve_workers,
)
from .errors import ResourceLimitError, SpecgridError, ValidationError
from .kernels import BACKEND_NAME
from .linalg import smin, smin_exceeds
from .operators import (
    AccumulatingDiagonal,
    DecomposedOperator,
    DiagonalOperator,
    FixedMatrixOperator,
    JacobiOperator,
    MatrixElementProvider,
    ZeroOperator,
    provider_from_config,
    register_operator,
    truncate,
    truncate_perturbed,
)
from .schrodinger import (
    BumpPotential,
    LaplacianOperator,
    SchrodingerProblem,
    assemble_hamiltonian,
    choose_l,
    gamma3,
    problem_from_config,
    unit_bump_problem,
)
from .setdist import (
    Disk,
    FinitePoints,
    HalfLine,
    RealIntervals,
    attouch_wets,
    attouch_wets_report,
    descriptor_from_config,
    dist_to,
    hausdorff,
    window_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AccumulatingDiagonal",
    "BACKEND_NAME",
    "BumpPotential",
    "DecomposedOperator",
    "DiagonalOperator",
    "Disk",
    "FinitePoints",
    "FixedMatrixOperator",
    "Grid",
    "HalfLine",
    "JacobiOperator",
    "LaplacianOperator",
    "MatrixElementProvider",
    "RealIntervals",
    "ResourceLimitError",
    "SchrodingerProblem",
    "SpecgridError",
    "SpectralSet",
    "ValidationError",
    "ZeroOperator",
    "__version__",
    "assemble_hamiltonian",
    "attouch_wets",
    "attouch_wets_report",
    "choose_l",
    "descriptor_from_config",
    "dist_to",
    "gamma1",
    "gamma2",
    "gamma2_widened",
    "gamma3",
    "grid",
    "hausdorff",
    "problem_from_config",
    "provider_from_config",
    "register_operator",
    "resolve_workers",
    "smin",
    "smin_exceeds",
    "truncate",
    "truncate_perturbed",
    "unit_bump_problem",
    "window_distance",
]
