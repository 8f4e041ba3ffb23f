"""Lattice of subspaces of C^n represented by orthonormal bases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import DEFAULT_CONTEXT, NumericalContext, as_matrix, factorize, numerical_rank, op_norm


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of ``C^ambient_dim`` spanned by the orthonormal columns of ``basis``.

    ``ill_determined`` is an advisory flag inherited from the rank decision
    that produced the basis. The zero subspace has an ``n x 0`` basis.
    """

    basis: np.ndarray
    ctx: NumericalContext = DEFAULT_CONTEXT
    ill_determined: bool = False
    _projector: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        B = as_matrix(self.basis)
        n, k = B.shape
        if k > n:
            raise DimensionError(f"basis has {k} columns in ambient dimension {n}")
        if k and op_norm(B.conj().T @ B - np.eye(k)) > self.ctx.eq_tol:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "_projector", B @ B.conj().T)

    @classmethod
    def span(cls, vectors, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
        """Subspace spanned by the columns of an arbitrary matrix."""
        return range_of(vectors, ctx)

    @classmethod
    def zero(cls, n: int, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
        return cls(np.zeros((n, 0), dtype=np.complex128), ctx)

    @classmethod
    def full(cls, n: int, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
        return cls(np.eye(n, dtype=np.complex128), ctx)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self._projector

    def __repr__(self):
        flag = ", ill-determined" if self.ill_determined else ""
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim}{flag})"

    def __add__(self, other):
        return subspace_sum(self, other)

    def __and__(self, other):
        return intersect(self, other)


def _check_ambient(S1: Subspace, S2: Subspace):
    if S1.ambient_dim != S2.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {S1.ambient_dim} vs {S2.ambient_dim}")


def range_of(T, ctx: NumericalContext = DEFAULT_CONTEXT, scale: float | None = None) -> Subspace:
    f = factorize(T)
    r, ill = numerical_rank(f, ctx, scale)
    return Subspace(f.left[:, :r], ctx, ill)


def kernel_of(T, ctx: NumericalContext = DEFAULT_CONTEXT, scale: float | None = None) -> Subspace:
    f = factorize(T)
    r, ill = numerical_rank(f, ctx, scale)
    return Subspace(f.right[:, r:], ctx, ill)


def complement(S: Subspace) -> Subspace:
    n, k = S.basis.shape
    if k == 0:
        return Subspace.full(n, S.ctx)
    # the basis has exactly k unit singular values, so no rank decision is needed
    U = np.linalg.svd(S.basis, full_matrices=True)[0]
    return Subspace(U[:, k:], S.ctx, S.ill_determined)


def subspace_sum(S1: Subspace, S2: Subspace) -> Subspace:
    _check_ambient(S1, S2)
    joined = range_of(np.hstack([S1.basis, S2.basis]), S1.ctx)
    if S1.ill_determined or S2.ill_determined:
        joined = Subspace(joined.basis, joined.ctx, True)
    return joined


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    """Intersection through ``(A^perp + B^perp)^perp``."""
    _check_ambient(S1, S2)
    return complement(subspace_sum(complement(S1), complement(S2)))


def distance(S1: Subspace, S2: Subspace) -> float:
    """Operator 2-norm of the difference of the orthogonal projectors."""
    _check_ambient(S1, S2)
    return op_norm(S1.projector - S2.projector)


def containment_gap(S1: Subspace, S2: Subspace) -> float:
    """``||(I - P1) P2||_2``; zero exactly when ``S2`` lies inside ``S1``."""
    _check_ambient(S1, S2)
    return op_norm(S2.basis - S1.basis @ (S1.basis.conj().T @ S2.basis))


def equal(S1: Subspace, S2: Subspace) -> bool:
    return distance(S1, S2) <= S1.ctx.eq_tol


def contains(S1: Subspace, S2: Subspace) -> bool:
    return containment_gap(S1, S2) <= S1.ctx.eq_tol


def is_orthogonal_sum(S1: Subspace, S2: Subspace) -> bool:
    """True when ``C^n = S1 (+) S2`` with ``S1`` orthogonal to ``S2``."""
    _check_ambient(S1, S2)
    n = S1.ambient_dim
    cross = op_norm(S1.basis.conj().T @ S2.basis)
    return cross <= S1.ctx.eq_tol and op_norm(S1.projector + S2.projector - np.eye(n)) <= S1.ctx.eq_tol


def principal_angles(S1: Subspace, S2: Subspace) -> np.ndarray:
    """Principal angles in radians, ascending, ``min(dim S1, dim S2)`` of them."""
    _check_ambient(S1, S2)
    if S1.dim == 0 or S2.dim == 0:
        return np.zeros(0)
    cosines = np.linalg.svd(S1.basis.conj().T @ S2.basis, compute_uv=False)
    return np.arccos(np.clip(cosines, -1.0, 1.0))
