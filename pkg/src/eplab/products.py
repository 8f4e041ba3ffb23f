"""Checks for when a product of two EP operators is again EP.

In finite dimension every subspace is closed and orthogonally complemented,
so density and closed-range hypotheses hold automatically. The reports say
so explicitly instead of dropping those conditions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ep import EpReport, is_ep
from .errors import DimensionError, IllDeterminedRankError, IllDeterminedRankWarning, PreconditionError
from .linalg import DEFAULT_CONTEXT, NumericalContext, as_matrix, factorize, fro, numerical_rank, op_norm
from .pseudoinverse import mp_svd
from .subspace import (
    Subspace,
    complement,
    contains,
    equal,
    intersect,
    is_orthogonal_sum,
    kernel_of,
    range_of,
    subspace_sum,
)

COND_II_NOTE = (
    "Ker(T) + Ker(S) is dense in its biorthogonal complement automatically: "
    "in finite dimension every subspace is closed"
)


def _pinv(T, ctx, scale=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        return mp_svd(T, ctx, scale)


def product_scale(T, S) -> float:
    """Reference magnitude ``||T|| ||S||`` for rank decisions about ``TS``."""
    return op_norm(T) * op_norm(S)


def _square_pair(T, S):
    T, S = as_matrix(T), as_matrix(S)
    if T.shape[0] != T.shape[1] or S.shape != T.shape:
        raise DimensionError(f"need two square operators of equal size, got {T.shape} and {S.shape}")
    return T, S


def commutator_norm(T, S) -> float:
    return fro(T @ S - S @ T)


def _commuting(T, S, ctx) -> bool:
    return commutator_norm(T, S) <= ctx.eq_tol * (1 + fro(T) * fro(S))


def _require_ep(ctx, **operators) -> dict[str, EpReport]:
    """Raise unless every operator is EP; values are matrices or ``(matrix, scale)`` pairs."""
    reports = {
        name: is_ep(op[0], ctx, op[1]) if isinstance(op, tuple) else is_ep(op, ctx)
        for name, op in operators.items()
    }
    failed = [name for name, rep in reports.items() if not rep.is_ep]
    if failed:
        raise PreconditionError(f"not EP: {', '.join(failed)}")
    return reports


def commuting_mp_check(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> bool:
    """Whether ``S`` commutes with ``T^+`` given that it commutes with ``T``.

    This is guaranteed when ``T`` is EP (or normal). For a non-EP ``T`` it can
    fail, e.g. ``T = S = [[0, 1], [0, 0]]``.
    """
    T, S = _square_pair(T, S)
    if not _commuting(T, S, ctx):
        raise PreconditionError(f"T and S do not commute (||TS - ST|| = {commutator_norm(T, S):.3e})")
    r, ill = numerical_rank(factorize(T), ctx)
    if ill:
        raise IllDeterminedRankError(f"rank {r} of T is ill-determined")
    G = _pinv(T, ctx)
    return fro(S @ G - G @ S) <= ctx.eq_tol * (1 + fro(S) * fro(G))


@dataclass(frozen=True)
class CommutingProductReport:
    ts: EpReport
    err_s_pinv_t_pinv: float
    err_t_pinv_s_pinv: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.ts.is_ep and max(self.err_s_pinv_t_pinv, self.err_t_pinv_s_pinv) <= self.tol


def commuting_ep_product(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> CommutingProductReport:
    """For commuting EP ``T, S``: ``TS`` is EP and ``(TS)^+ = S^+ T^+ = T^+ S^+``."""
    T, S = _square_pair(T, S)
    _require_ep(ctx, T=T, S=S)
    if not _commuting(T, S, ctx):
        raise PreconditionError(f"T and S do not commute (||TS - ST|| = {commutator_norm(T, S):.3e})")
    TS, scale = T @ S, product_scale(T, S)
    G_ts, G_t, G_s = _pinv(TS, ctx, scale), _pinv(T, ctx), _pinv(S, ctx)
    return CommutingProductReport(
        ts=is_ep(TS, ctx, scale),
        err_s_pinv_t_pinv=fro(G_ts - G_s @ G_t),
        err_t_pinv_s_pinv=fro(G_ts - G_t @ G_s),
        tol=ctx.eq_tol * (1 + fro(G_ts)),
    )


def _inclusions(T, S, ctx) -> tuple[bool, bool]:
    ran_S, ran_T = range_of(S, ctx), range_of(T, ctx)
    first = contains(ran_S, range_of(T @ ran_S.basis, ctx, op_norm(T)))
    second = contains(ran_T, range_of(S.conj().T @ ran_T.basis, ctx, op_norm(S)))
    return first, second


def invariance_inclusions(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> tuple[bool, bool]:
    """``T(Ran S) <= Ran S`` and ``S^*(Ran T) <= Ran T``, for EP ``T``, ``S`` and ``TS``."""
    T, S = _square_pair(T, S)
    _require_ep(ctx, T=T, S=S, TS=(T @ S, product_scale(T, S)))
    return _inclusions(T, S, ctx)


def kernel_decomposition_holds(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> bool:
    """``Ker(TS) = Ker(S) (+) Ker(S1)`` where ``S1 = P_Ran(T) S|_Ran(S)``.

    Holds whenever ``T`` and ``S`` are EP.
    """
    T, S = _square_pair(T, S)
    ran_T, ran_S = range_of(T, ctx), range_of(S, ctx)
    S1 = ran_T.basis.conj().T @ S @ ran_S.basis
    ker_S1 = kernel_of(S1, ctx, op_norm(S))
    lifted = Subspace(ran_S.basis @ ker_S1.basis, ctx)
    return equal(kernel_of(T @ S, ctx, product_scale(T, S)), subspace_sum(kernel_of(S, ctx), lifted))


@dataclass(frozen=True)
class ProductReport:
    """Conditions (i)-(iv) for a product ``TS`` of EP operators and their logical relations.

    (i) ``TS`` is EP; (ii) ``Ker T + Ker S`` is dense in its biorthogonal
    complement (automatic here); (iii) ``Ran(TS) = Ran T & Ran S``;
    (iv) ``Ker(TS) = Ker T + Ker S``.
    """

    ts_ep: EpReport
    cond_i: bool
    cond_ii: bool
    cond_ii_note: str
    cond_iii: bool
    cond_iv: bool
    inclusions: tuple[bool, bool]
    kernel_decomposition: bool
    implication_i_iii: bool
    biconditional: bool
    inclusions_if_ep: bool

    @property
    def consistent(self) -> bool:
        return self.implication_i_iii and self.biconditional and self.inclusions_if_ep and self.kernel_decomposition

    @property
    def verdict(self) -> str:
        return "corollary respected" if self.consistent else "THEOREM VIOLATION"

    def as_dict(self) -> dict:
        return {
            "cond_i_ts_ep": self.cond_i,
            "cond_ii_dense_kernel_sum": self.cond_ii,
            "cond_ii_note": self.cond_ii_note,
            "cond_iii_range_intersection": self.cond_iii,
            "cond_iv_kernel_sum": self.cond_iv,
            "inclusion_T_ranS": self.inclusions[0],
            "inclusion_Sadj_ranT": self.inclusions[1],
            "kernel_decomposition": self.kernel_decomposition,
            "implication_i_to_iii": self.implication_i_iii,
            "biconditional_i_ii_vs_iii_iv": self.biconditional,
            "inclusions_when_ts_ep": self.inclusions_if_ep,
            "verdict": self.verdict,
            "ts": self.ts_ep.as_dict(),
        }


def theorem_ep6(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> ProductReport:
    T, S = _square_pair(T, S)
    _require_ep(ctx, T=T, S=S)
    TS, scale = T @ S, product_scale(T, S)
    ts = is_ep(TS, ctx, scale)
    cond_i, cond_ii = ts.is_ep, True
    cond_iii = equal(range_of(TS, ctx, scale), intersect(range_of(T, ctx), range_of(S, ctx)))
    cond_iv = equal(kernel_of(TS, ctx, scale), subspace_sum(kernel_of(T, ctx), kernel_of(S, ctx)))
    inclusions = _inclusions(T, S, ctx)
    return ProductReport(
        ts_ep=ts,
        cond_i=cond_i,
        cond_ii=cond_ii,
        cond_ii_note=COND_II_NOTE,
        cond_iii=cond_iii,
        cond_iv=cond_iv,
        inclusions=inclusions,
        kernel_decomposition=kernel_decomposition_holds(T, S, ctx),
        implication_i_iii=(not cond_i) or cond_iii,
        biconditional=(cond_i and cond_ii) == (cond_iii and cond_iv),
        inclusions_if_ep=(not cond_i) or all(inclusions),
    )


@dataclass(frozen=True)
class ClosedRangeNote:
    summand_dim: int
    complemented: bool
    ts_rank: int
    note: str


def product_closed_range_note(T, S, ctx: NumericalContext = DEFAULT_CONTEXT) -> ClosedRangeNote:
    """``Ker(T) + Ran(S)`` is an orthogonal summand, so ``TS`` has closed range."""
    T, S = as_matrix(T), as_matrix(S)
    if T.shape[1] != S.shape[0]:
        raise DimensionError(f"cannot multiply {T.shape} by {S.shape}")
    summand = subspace_sum(kernel_of(T, ctx), range_of(S, ctx))
    complemented = is_orthogonal_sum(summand, complement(summand))
    r, _ = numerical_rank(factorize(T @ S), ctx, product_scale(T, S))
    note = "finite dimension: every subspace is an orthogonal summand, so TS has closed range"
    return ClosedRangeNote(summand.dim, complemented, r, note)


def skew_projection_pair() -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projections onto ``e1`` and ``(1, 1)/sqrt 2``; their product is not EP."""
    T = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    S = 0.5 * np.array([[1, 1], [1, 1]], dtype=np.complex128)
    return T, S


def invertible_skew_pair() -> tuple[np.ndarray, np.ndarray]:
    """Projection onto ``e1`` times an invertible shear: (iii) holds, (i) and (iv) fail."""
    T = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    S = np.array([[1, 1], [0, 1]], dtype=np.complex128)
    return T, S
