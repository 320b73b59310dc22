"""Operators given by matrix elements, and their finite truncations.

An operator enters the package as a provider: something that can report
the matrix element <T e_i, e_j> for the first k_n basis vectors at each
level n.  Truncation compresses to that block; for providers flagged
selfadjoint the block is Hermitian-symmetrized, which is exact in
floating point ((A + A^H)/2 entrywise).

A perturbed operator H = T + V is kept as the pair (t_part, v_part) so
downstream algorithms can use both H_n and the unperturbed T_n.  The
mathematical assumptions on the pair (t_part selfadjoint with spectrum
equal to its essential spectrum and convex extended essential spectrum;
v_part and its adjoint relatively compact with respect to t_part) cannot
be checked from finitely many elements and are asserted by the caller.

Built-in providers are all "nested": their elements do not depend on n,
so truncations at increasing levels agree on leading blocks.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ResourceLimitError, ValidationError

# Largest truncation dimension assembled without an explicit opt-in.
DEFAULT_DIMENSION_CAP = 4096


def _resolve_sizes(sizes) -> Callable[[int], int]:
    if sizes is None:
        return lambda n: n
    if isinstance(sizes, int):
        if sizes < 1:
            raise ValidationError(f"constant basis size must be >= 1, got {sizes}")
        return lambda n: sizes
    if callable(sizes):
        return sizes
    raise ValidationError("sizes must be None, a positive int, or a callable")


def _as_scalar(value) -> complex:
    """Parse a scalar from python/config form: number or [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"complex entries need [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


class MatrixElementProvider:
    """Base class: matrix elements of an operator in a fixed basis."""

    selfadjoint: bool = False

    def basis_size(self, n: int) -> int:
        raise NotImplementedError

    def element(self, i: int, j: int, n: int) -> complex:
        raise NotImplementedError

    def dense(self, n: int):
        """Optional fast path: full k_n x k_n block, or None to use element()."""
        return None

    def describe(self) -> dict:
        return {"name": type(self).__name__}


class ZeroOperator(MatrixElementProvider):
    selfadjoint = True

    def __init__(self, sizes=None):
        self._sizes = _resolve_sizes(sizes)

    def basis_size(self, n: int) -> int:
        return self._sizes(n)

    def element(self, i: int, j: int, n: int) -> complex:
        return 0j

    def dense(self, n: int):
        k = self.basis_size(n)
        return np.zeros((k, k), dtype=np.complex128)

    def describe(self) -> dict:
        return {"name": "zero"}


class DiagonalOperator(MatrixElementProvider):
    """Diagonal operator from a bounded sequence of entries.

    `entries` is either a callable i -> value or a finite sequence that
    is repeated cyclically.  Real entries give a selfadjoint provider;
    for a callable the caller must state selfadjointness explicitly.
    """

    def __init__(self, entries, sizes=None, selfadjoint: bool | None = None):
        self._sizes = _resolve_sizes(sizes)
        if callable(entries):
            self._entry = entries
            self._seq = None
            if selfadjoint is None:
                raise ValidationError(
                    "selfadjoint must be stated explicitly for callable entries"
                )
            self.selfadjoint = bool(selfadjoint)
        else:
            seq = [_as_scalar(v) for v in entries]
            if not seq:
                raise ValidationError("entries sequence must be nonempty")
            self._seq = seq
            self._entry = lambda i: seq[i % len(seq)]
            real = all(v.imag == 0.0 for v in seq)
            self.selfadjoint = real if selfadjoint is None else bool(selfadjoint)

    def basis_size(self, n: int) -> int:
        return self._sizes(n)

    def element(self, i: int, j: int, n: int) -> complex:
        return self._entry(i) if i == j else 0j

    def dense(self, n: int):
        k = self.basis_size(n)
        return np.diag([self._entry(i) for i in range(k)]).astype(np.complex128)

    def describe(self) -> dict:
        if self._seq is not None:
            return {"name": "diagonal", "entries": [[v.real, v.imag] for v in self._seq]}
        return {"name": "diagonal", "entries": "<callable>"}


class JacobiOperator(MatrixElementProvider):
    """Tridiagonal operator with constant real diagonal and off-diagonal."""

    selfadjoint = True

    def __init__(self, diagonal: float = 0.0, offdiagonal: float = 1.0, sizes=None):
        self.diagonal = float(diagonal)
        self.offdiagonal = float(offdiagonal)
        self._sizes = _resolve_sizes(sizes)

    def basis_size(self, n: int) -> int:
        return self._sizes(n)

    def element(self, i: int, j: int, n: int) -> complex:
        if i == j:
            return complex(self.diagonal)
        if abs(i - j) == 1:
            return complex(self.offdiagonal)
        return 0j

    def dense(self, n: int):
        k = self.basis_size(n)
        m = np.diag(np.full(k, self.diagonal, dtype=np.complex128))
        if k > 1:
            off = np.full(k - 1, self.offdiagonal, dtype=np.complex128)
            m += np.diag(off, 1) + np.diag(off, -1)
        return m

    def describe(self) -> dict:
        return {
            "name": "jacobi",
            "diagonal": self.diagonal,
            "offdiagonal": self.offdiagonal,
        }


class AccumulatingDiagonal(MatrixElementProvider):
    """Real diagonal whose entries accumulate at the prescribed points.

    Entry i is points[i % m] + rate / (1 + i // m), so every point is an
    accumulation point of the diagonal sequence.
    """

    selfadjoint = True

    def __init__(self, points: Sequence[float], rate: float = 1.0, sizes=None):
        pts = [float(p) for p in points]
        if not pts:
            raise ValidationError("points must be nonempty")
        self.points = pts
        self.rate = float(rate)
        self._sizes = _resolve_sizes(sizes)

    def _entry(self, i: int) -> float:
        m = len(self.points)
        return self.points[i % m] + self.rate / (1 + i // m)

    def basis_size(self, n: int) -> int:
        return self._sizes(n)

    def element(self, i: int, j: int, n: int) -> complex:
        return complex(self._entry(i)) if i == j else 0j

    def dense(self, n: int):
        k = self.basis_size(n)
        return np.diag([self._entry(i) for i in range(k)]).astype(np.complex128)

    def describe(self) -> dict:
        return {"name": "accumulating", "points": self.points, "rate": self.rate}


class FixedMatrixOperator(MatrixElementProvider):
    """A fixed dense matrix, exposed at every level."""

    def __init__(self, matrix, selfadjoint: bool | None = None):
        arr = np.array(
            [[_as_scalar(v) for v in row] for row in matrix]
            if not isinstance(matrix, np.ndarray)
            else matrix,
            dtype=np.complex128,
        )
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValidationError(f"matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix entries must be finite")
        self.matrix = arr
        if selfadjoint is None:
            self.selfadjoint = bool(np.array_equal(arr, arr.conj().T))
        else:
            self.selfadjoint = bool(selfadjoint)

    def basis_size(self, n: int) -> int:
        return self.matrix.shape[0]

    def element(self, i: int, j: int, n: int) -> complex:
        return complex(self.matrix[i, j])

    def dense(self, n: int):
        return self.matrix.copy()

    def describe(self) -> dict:
        return {
            "name": "matrix",
            "matrix": [[[v.real, v.imag] for v in row] for row in self.matrix],
        }


class AdjointOperator(MatrixElementProvider):
    """Elements of the adjoint: conj of the transposed elements of the base."""

    def __init__(self, base: MatrixElementProvider):
        self.base = base
        self.selfadjoint = base.selfadjoint

    def basis_size(self, n: int) -> int:
        return self.base.basis_size(n)

    def element(self, i: int, j: int, n: int) -> complex:
        return complex(np.conj(self.base.element(j, i, n)))

    def dense(self, n: int):
        block = self.base.dense(n)
        return None if block is None else np.ascontiguousarray(block.conj().T)

    def describe(self) -> dict:
        return {"name": "adjoint", "base": self.base.describe()}


class DecomposedOperator:
    """Perturbed operator H = T + V kept as the pair of its parts."""

    def __init__(self, t_part: MatrixElementProvider, v_part: MatrixElementProvider):
        if not t_part.selfadjoint:
            raise ValidationError("t_part must have its selfadjoint flag set")
        self.t_part = t_part
        self.v_part = v_part

    def describe(self) -> dict:
        return {
            "t_part": self.t_part.describe(),
            "v_part": self.v_part.describe(),
        }


def _validated_level(n) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"level n must be an integer >= 1, got {n!r}")
    return int(n)


def truncate(
    p: MatrixElementProvider, n: int, cap: int = DEFAULT_DIMENSION_CAP
) -> np.ndarray:
    """k_n x k_n truncation of the provider; Hermitian-symmetrized if selfadjoint.

    Entry (i, j) is element(i, j, n).  Raises ResourceLimitError before
    assembling anything when k_n exceeds `cap`.
    """
    n = _validated_level(n)
    if cap < 1:
        raise ValidationError(f"dimension cap must be >= 1, got {cap}")
    k = p.basis_size(n)
    if k < 1:
        raise ValidationError(f"basis_size must be >= 1, got {k}")
    if k > cap:
        raise ResourceLimitError(
            f"truncation dimension {k} at level n={n} exceeds cap {cap}"
        )
    block = p.dense(n)
    if block is None:
        block = np.empty((k, k), dtype=np.complex128)
        for i in range(k):
            for j in range(k):
                block[i, j] = p.element(i, j, n)
    else:
        block = np.array(block, dtype=np.complex128)
        if block.shape != (k, k):
            raise ValidationError(
                f"dense() returned shape {block.shape}, expected {(k, k)}"
            )
    if not np.all(np.isfinite(block)):
        raise ValidationError("provider produced non-finite matrix elements")
    if p.selfadjoint:
        block = (block + block.conj().T) / 2
    return block


def truncate_perturbed(
    h: DecomposedOperator, n: int, cap: int = DEFAULT_DIMENSION_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """Return (T_n, H_n) with H_n = T_n + V_n assembled entrywise."""
    n = _validated_level(n)
    kt = h.t_part.basis_size(n)
    kv = h.v_part.basis_size(n)
    if kt != kv:
        raise ValidationError(
            f"t_part and v_part disagree on basis size at n={n}: {kt} != {kv}"
        )
    t_n = truncate(h.t_part, n, cap)
    v_n = truncate(h.v_part, n, cap)
    return t_n, t_n + v_n


# ---------------------------------------------------------------------------
# Config-driven construction


def _zero_factory(params: dict) -> MatrixElementProvider:
    return ZeroOperator(sizes=params.get("size"))


def _diagonal_factory(params: dict) -> MatrixElementProvider:
    if "entries" not in params:
        raise ValidationError("diagonal operator config needs 'entries'")
    return DiagonalOperator(params["entries"], sizes=params.get("size"))


def _jacobi_factory(params: dict) -> MatrixElementProvider:
    return JacobiOperator(
        diagonal=params.get("diagonal", 0.0),
        offdiagonal=params.get("offdiagonal", 1.0),
        sizes=params.get("size"),
    )


def _accumulating_factory(params: dict) -> MatrixElementProvider:
    if "points" not in params:
        raise ValidationError("accumulating operator config needs 'points'")
    return AccumulatingDiagonal(
        params["points"], rate=params.get("rate", 1.0), sizes=params.get("size")
    )


def _matrix_factory(params: dict) -> MatrixElementProvider:
    if "matrix" not in params:
        raise ValidationError("matrix operator config needs 'matrix'")
    return FixedMatrixOperator(
        params["matrix"], selfadjoint=params.get("selfadjoint")
    )


def _decomposed_factory(params: dict) -> "DecomposedOperator":
    if "t" not in params or "v" not in params:
        raise ValidationError("decomposed operator config needs 't' and 'v'")
    return DecomposedOperator(
        provider_from_config(params["t"]), provider_from_config(params["v"])
    )


BUILTIN_OPERATORS: dict[str, Callable[[dict], MatrixElementProvider]] = {
    "zero": _zero_factory,
    "diagonal": _diagonal_factory,
    "jacobi": _jacobi_factory,
    "accumulating": _accumulating_factory,
    "matrix": _matrix_factory,
    "decomposed": _decomposed_factory,
}


def register_operator(name: str, factory: Callable[[dict], MatrixElementProvider]):
    """Register a provider factory for config-driven construction."""
    BUILTIN_OPERATORS[name] = factory


def provider_from_config(cfg: dict) -> MatrixElementProvider:
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ValidationError("operator config must be a dict with a 'name' key")
    name = cfg["name"]
    factory = BUILTIN_OPERATORS.get(name)
    if factory is None:
        known = ", ".join(sorted(BUILTIN_OPERATORS))
        raise ValidationError(f"unknown operator {name!r} (known: {known})")
    return factory(cfg)
