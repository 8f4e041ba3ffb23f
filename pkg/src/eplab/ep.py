"""EP detection, isomorphism factorizations and block forms of closed-range operators.

An operator is EP when its range coincides with the range of its adjoint.
:func:`is_ep` evaluates four equivalent characterizations separately; in exact
arithmetic they always agree, so a disagreement means the tolerances are
being stretched and is reported rather than resolved.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IllDeterminedRankError, IllDeterminedRankWarning, NotEPError
from .linalg import DEFAULT_CONTEXT, NumericalContext, as_matrix, factorize, fro, numerical_rank, op_norm
from .pseudoinverse import mp_svd
from .sampling import complex_gaussian, random_unitary, rng_for
from .subspace import (
    Subspace,
    complement,
    distance,
    equal,
    is_orthogonal_sum,
    kernel_of,
    principal_angles,
    range_of,
)


def _quiet_pinv(T, ctx, scale=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        return mp_svd(T, ctx, scale)


def _require_square(T: np.ndarray):
    if T.shape[0] != T.shape[1]:
        raise DimensionError(f"EP is only defined for square operators, got {T.shape}")


@dataclass(frozen=True)
class EpReport:
    range_equal: bool
    kernel_equal: bool
    mp_commutes: bool
    orth_decomp: bool
    is_ep: bool
    disagreement: bool
    rank: int
    ill_determined: bool
    range_distance: float
    max_principal_angle: float

    def as_dict(self) -> dict:
        return {
            "is_ep": self.is_ep,
            "rank": self.rank,
            "ill_determined": self.ill_determined,
            "range_equal": self.range_equal,
            "kernel_equal": self.kernel_equal,
            "mp_commutes": self.mp_commutes,
            "orth_decomp": self.orth_decomp,
            "disagreement": self.disagreement,
            "range_distance": self.range_distance,
            "max_principal_angle": self.max_principal_angle,
        }


def is_ep(T, ctx: NumericalContext = DEFAULT_CONTEXT, scale: float | None = None) -> EpReport:
    """Evaluate the four equivalent EP characterizations of a square operator.

    The characterizations are ``Ran(T) = Ran(T^*)``, ``Ker(T) = Ker(T^*)``,
    ``T T^+ = T^+ T`` and ``C^n = Ran(T) (+) Ker(T)`` orthogonally.
    ``range_distance`` and ``max_principal_angle`` compare ``Ran(T)`` with
    ``Ran(T^*)`` and serve as evidence when ``T`` is not EP. ``scale`` is the
    reference magnitude for rank decisions (see
    :func:`~eplab.linalg.numerical_rank`).
    """
    T = as_matrix(T)
    _require_square(T)
    Th = T.conj().T
    f = factorize(T)
    r, ill = numerical_rank(f, ctx, scale)
    ran_T = Subspace(f.left[:, :r], ctx, ill)
    ker_T = Subspace(f.right[:, r:], ctx, ill)
    ran_Th, ker_Th = range_of(Th, ctx, scale), kernel_of(Th, ctx, scale)
    G = _quiet_pinv(T, ctx, scale)

    checks = (
        equal(ran_T, ran_Th),
        equal(ker_T, ker_Th),
        fro(T @ G - G @ T) <= ctx.eq_tol,
        is_orthogonal_sum(ran_T, ker_T),
    )
    if ran_T.dim == ran_Th.dim:
        angles = principal_angles(ran_T, ran_Th)
        max_angle = float(angles.max()) if angles.size else 0.0
    else:
        max_angle = float(np.pi / 2)
    return EpReport(
        *checks,
        is_ep=all(checks),
        disagreement=len(set(checks)) > 1,
        rank=r,
        ill_determined=ill,
        range_distance=distance(ran_T, ran_Th),
        max_principal_angle=max_angle,
    )


def _ep_parts(T: np.ndarray, ctx: NumericalContext):
    """Range basis ``Q``, kernel basis ``K`` and the compression ``Q^* T Q``."""
    report = is_ep(T, ctx)
    if not report.is_ep:
        raise NotEPError("operator is not EP")
    f = factorize(T)
    r = report.rank
    Q, K = f.left[:, :r], f.left[:, r:]
    return Q, K, Q.conj().T @ T @ Q


def _smallest_singular_value(M: np.ndarray) -> float:
    if M.size == 0:
        return np.inf
    return float(np.linalg.svd(M, compute_uv=False)[-1])


@dataclass(frozen=True)
class EpFactorization:
    """Isomorphism ``V`` with ``T^* = V T`` (``adjoint_form``) or ``T^+ = V T = T V`` (``commuting_form``).

    ``lower_bound`` is the smallest singular value of ``T`` restricted to its
    range, the constant with ``||T x|| >= c ||x||`` there.
    """

    V: np.ndarray
    kind: str
    residual: float
    lower_bound: float
    v_sigma_min: float


def _restricted_inverse(T1: np.ndarray, lower_bound: float, ctx: NumericalContext) -> np.ndarray:
    if T1.size and lower_bound <= ctx.eq_tol:
        raise np.linalg.LinAlgError("restriction of T to its range is numerically singular")
    return np.linalg.solve(T1, np.eye(T1.shape[0], dtype=np.complex128))


def ep_factor_adjoint(T, ctx: NumericalContext = DEFAULT_CONTEXT) -> EpFactorization:
    """``V = T^* (T|Ran)^{-1}`` on ``Ran(T)`` and the identity on ``Ker(T)``."""
    T = as_matrix(T)
    Q, K, T1 = _ep_parts(T, ctx)
    c = _smallest_singular_value(T1)
    T1_inv = _restricted_inverse(T1, c, ctx)
    V = T.conj().T @ Q @ T1_inv @ Q.conj().T + K @ K.conj().T
    residual = fro(T.conj().T - V @ T)
    return EpFactorization(V, "adjoint_form", residual, c, _smallest_singular_value(V))


def ep_factor_commuting(T, ctx: NumericalContext = DEFAULT_CONTEXT) -> EpFactorization:
    """``V = (T|Ran)^{-2}`` on ``Ran(T)`` and the identity on ``Ker(T)``; then ``VT = TV = T^+``."""
    T = as_matrix(T)
    Q, K, T1 = _ep_parts(T, ctx)
    c = _smallest_singular_value(T1)
    T1_inv = _restricted_inverse(T1, c, ctx)
    V = Q @ T1_inv @ T1_inv @ Q.conj().T + K @ K.conj().T
    G = _quiet_pinv(T, ctx)
    residual = max(fro(G - V @ T), fro(G - T @ V))
    return EpFactorization(V, "commuting_form", residual, c, _smallest_singular_value(V))


@dataclass(frozen=True)
class CanonicalForm:
    """``T = U diag(T1, 0) U^*`` with ``U = [range basis | kernel basis]``."""

    U: np.ndarray
    T1: np.ndarray

    @property
    def rank(self) -> int:
        return self.T1.shape[0]

    def _embed(self, block: np.ndarray) -> np.ndarray:
        r = self.rank
        Q = self.U[:, :r]
        return Q @ block @ Q.conj().T

    def reconstruct(self) -> np.ndarray:
        return self._embed(self.T1)

    def pinv(self) -> np.ndarray:
        return self._embed(np.linalg.inv(self.T1)) if self.rank else np.zeros_like(self.U)


def canonical_form(T, ctx: NumericalContext = DEFAULT_CONTEXT) -> CanonicalForm:
    T = as_matrix(T)
    Q, K, T1 = _ep_parts(T, ctx)
    return CanonicalForm(np.hstack([Q, K]), T1)


@dataclass(frozen=True)
class BlockDecomposition:
    """Matrix of ``T`` from ``Ran(T^*) (+) Ker(T)`` to ``W (+) W^perp``.

    Only the first block column can be nonzero; ``off_block_norm`` records the
    size of the second one. ``mp_from_blocks`` is the Moore-Penrose inverse
    ``[[A^{-1} T1^*, A^{-1} T2^*], [0, 0]]`` mapped back to standard
    coordinates, where ``A = T1^* T1 + T2^* T2``.
    """

    domain_range: np.ndarray
    domain_kernel: np.ndarray
    codomain_w: np.ndarray
    codomain_w_perp: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    A: np.ndarray
    off_block_norm: float
    a_sigma_min: float
    mp_from_blocks: np.ndarray


def block_decompose(T, W: Subspace, ctx: NumericalContext = DEFAULT_CONTEXT) -> BlockDecomposition:
    T = as_matrix(T)
    if W.ambient_dim != T.shape[0]:
        raise DimensionError(f"W lives in C^{W.ambient_dim}, T maps into C^{T.shape[0]}")
    f = factorize(T)
    r, ill = numerical_rank(f, ctx)
    if ill:
        raise IllDeterminedRankError(f"rank {r} of T is ill-determined")
    R, K = f.right[:, :r], f.right[:, r:]
    Bw, Bc = W.basis, complement(W).basis
    T1 = Bw.conj().T @ T @ R
    T2 = Bc.conj().T @ T @ R
    off = fro(T @ K)
    A = T1.conj().T @ T1 + T2.conj().T @ T2
    a_min = _smallest_singular_value(A)
    if r and a_min <= ctx.eq_tol:
        raise np.linalg.LinAlgError("A = T1^*T1 + T2^*T2 is numerically singular")
    top_left = np.linalg.solve(A, T1.conj().T) if r else np.zeros((0, Bw.shape[1]))
    top_right = np.linalg.solve(A, T2.conj().T) if r else np.zeros((0, Bc.shape[1]))
    mp = R @ (top_left @ Bw.conj().T + top_right @ Bc.conj().T)
    return BlockDecomposition(R, K, Bw, Bc, T1, T2, A, off, a_min, mp)


def random_ep(n: int, r: int, seed=None, sigma_min: float = 0.1, sigma_max: float = 2.0) -> np.ndarray:
    """``U diag(M, 0) U^*`` with Haar ``U`` and invertible ``M`` whose singular values lie in ``[sigma_min, sigma_max]``."""
    if not 0 <= r <= n:
        raise ValueError(f"rank {r} out of range for n={n}")
    rng = rng_for(seed)
    U = random_unitary(n, rng)
    X, Y = random_unitary(r, rng), random_unitary(r, rng)
    s = rng.uniform(sigma_min, sigma_max, r)
    M = (X * s) @ Y.conj().T
    Q = U[:, :r]
    return Q @ M @ Q.conj().T


def random_commuting_ep_pair(n: int, seed=None, zero_prob: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """``(U D1 U^*, U D2 U^*)`` with diagonal ``D1, D2`` that each contain zeros.

    Nonzero diagonal entries have modulus in ``[0.5, 2]`` and a random phase.
    For ``n >= 2`` both diagonals are forced to have at least one zero, placed
    independently.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_for(seed)
    U = random_unitary(n, rng)

    def diagonal():
        d = rng.uniform(0.5, 2.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
        mask = rng.uniform(size=n) < zero_prob
        if n >= 2 and not mask.any():
            mask[rng.integers(n)] = True
        return np.where(mask, 0, d)

    d1, d2 = diagonal(), diagonal()
    return (U * d1) @ U.conj().T, (U * d2) @ U.conj().T


def random_generic(n: int, seed=None) -> np.ndarray:
    """Complex Gaussian matrix; full rank with probability one."""
    return complex_gaussian(rng_for(seed), (n, n))


def restricted_operator_norm(T, ctx: NumericalContext = DEFAULT_CONTEXT) -> float:
    """``||T|_Ran(T)||`` for an EP operator (equals ``||T||``)."""
    _, _, T1 = _ep_parts(as_matrix(T), ctx)
    return op_norm(T1)
