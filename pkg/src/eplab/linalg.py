"""Dense complex matrix primitives and the numerical-rank policy.

Operators are plain ``numpy`` arrays of dtype ``complex128``; every other
module goes through :func:`as_matrix` so that shapes and finiteness are
checked in one place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DimensionError


@dataclass(frozen=True)
class NumericalContext:
    """Tolerances that turn exact range/kernel statements into numerical ones.

    Attributes
    ----------
    rank_rel_tol : float
        Singular values at or below ``rank_rel_tol * sigma_max`` count as zero.
    eq_tol : float
        Absolute threshold for operator and projector equality.
    gap_warn_ratio : float
        A rank decision is flagged ill-determined when the ratio between the
        last kept and the first dropped singular value is below this.
    """

    rank_rel_tol: float = 1e-10
    eq_tol: float = 1e-9
    gap_warn_ratio: float = 1e4

    def __post_init__(self):
        for name in ("rank_rel_tol", "eq_tol", "gap_warn_ratio"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.rank_rel_tol >= 1:
            raise ValueError("rank_rel_tol must be < 1")


DEFAULT_CONTEXT = NumericalContext()


def as_matrix(T) -> np.ndarray:
    """Validate ``T`` as a finite 2-D operator and return it as complex128."""
    M = np.asarray(T)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {M.shape}")
    M = M.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def adjoint(T) -> np.ndarray:
    return as_matrix(T).conj().T


def multiply(T, S) -> np.ndarray:
    T, S = as_matrix(T), as_matrix(S)
    if T.shape[1] != S.shape[0]:
        raise DimensionError(f"cannot multiply {T.shape} by {S.shape}")
    return T @ S


def fro(T) -> float:
    return float(np.linalg.norm(T)) if np.size(T) else 0.0


def op_norm(T) -> float:
    """Operator 2-norm; zero for empty matrices."""
    if np.size(T) == 0:
        return 0.0
    return float(np.linalg.norm(T, 2))


@dataclass(frozen=True)
class SingularFactorization:
    """Full SVD ``T = left[:, :k] @ diag(singular_values) @ right[:, :k]^*``.

    ``left`` and ``right`` are square unitary factors, so trailing columns span
    the cokernel and kernel respectively.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.left.shape[0], self.right.shape[0]

    def reconstruct(self) -> np.ndarray:
        k = len(self.singular_values)
        return (self.left[:, :k] * self.singular_values) @ self.right[:, :k].conj().T


def factorize(T) -> SingularFactorization:
    T = as_matrix(T)
    m, n = T.shape
    if m == 0 or n == 0:
        return SingularFactorization(
            np.eye(m, dtype=np.complex128), np.zeros(0), np.eye(n, dtype=np.complex128)
        )
    try:
        U, s, Vh = np.linalg.svd(T, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return SingularFactorization(U, s, Vh.conj().T)


class RankDecision(NamedTuple):
    rank: int
    ill_determined: bool


def numerical_rank(
    f: SingularFactorization | np.ndarray,
    ctx: NumericalContext = DEFAULT_CONTEXT,
    scale: float | None = None,
) -> RankDecision:
    """Count singular values above ``rank_rel_tol * max(sigma_max, scale)``.

    Accepts either a factorization or a bare vector of nonincreasing singular
    values. ``scale`` is a reference magnitude for operators that are
    products: ``T S`` should be judged against ``||T|| ||S||``, otherwise a
    product that vanishes up to rounding has its noise counted as rank.
    """
    s = np.asarray(f.singular_values if isinstance(f, SingularFactorization) else f, dtype=float)
    ref = max(s[0] if s.size else 0.0, scale or 0.0)
    if ref == 0:
        return RankDecision(0, False)
    r = int(np.count_nonzero(s > ctx.rank_rel_tol * ref))
    if r == 0:
        return RankDecision(0, False)
    ill = r < s.size and s[r] > 0 and s[r - 1] / s[r] < ctx.gap_warn_ratio
    return RankDecision(r, bool(ill))
