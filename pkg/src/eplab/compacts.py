"""Finite direct sums of matrix algebras as models of compact-operator C*-algebras.

An element ``a = (a_1, ..., a_k)`` of ``M_{n_1} + ... + M_{n_k}`` acts on the
algebra itself by left multiplication ``L_a(x) = a x``. Coordinates are the
matrix units of each block flattened row-major and concatenated, so the
algebra is ``C^d`` with ``d = sum n_i^2``. Right ideals ``aA`` and annihilators
then become ordinary subspaces of ``C^d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ep import EpReport, is_ep
from .errors import DimensionError
from .linalg import DEFAULT_CONTEXT, NumericalContext, as_matrix, op_norm
from .sampling import random_unitary, rng_for
from .subspace import Subspace, equal, intersect, kernel_of, range_of, subspace_sum


@dataclass(frozen=True)
class BlockAlgebra:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n < 1 for n in dims):
            raise ValueError("block_dims must be a nonempty list of positive sizes")
        object.__setattr__(self, "block_dims", dims)

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.block_dims:
            out.append(acc)
            acc += n * n
        return tuple(out)

    def element(self, blocks) -> AlgebraElement:
        return AlgebraElement(self, tuple(blocks))

    def identity(self) -> AlgebraElement:
        return self.element(np.eye(n, dtype=np.complex128) for n in self.block_dims)

    def zero(self) -> AlgebraElement:
        return self.element(np.zeros((n, n), dtype=np.complex128) for n in self.block_dims)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: BlockAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(as_matrix(b) for b in self.blocks)
        dims = tuple(b.shape for b in blocks)
        if dims != tuple((n, n) for n in self.algebra.block_dims):
            raise DimensionError(f"block shapes {dims} do not match algebra {self.algebra.block_dims}")
        object.__setattr__(self, "blocks", blocks)

    def __matmul__(self, other: AlgebraElement) -> AlgebraElement:
        if other.algebra != self.algebra:
            raise DimensionError("elements belong to different algebras")
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> AlgebraElement:
        return AlgebraElement(self.algebra, tuple(b.conj().T for b in self.blocks))

    def coordinates(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])


def from_coordinates(algebra: BlockAlgebra, x) -> AlgebraElement:
    x = np.asarray(x, dtype=np.complex128)
    blocks = [x[o : o + n * n].reshape(n, n) for o, n in zip(algebra.offsets, algebra.block_dims)]
    return algebra.element(blocks)


def left_mult_matrix(a: AlgebraElement) -> np.ndarray:
    """Matrix of ``x -> a x``; block ``i`` is ``a_i (x) I`` in row-major coordinates."""
    return scipy.linalg.block_diag(*(np.kron(b, np.eye(b.shape[0])) for b in a.blocks))


def right_mult_matrix(a: AlgebraElement) -> np.ndarray:
    """Matrix of ``x -> x a``; block ``i`` is ``I (x) a_i^T``."""
    return scipy.linalg.block_diag(*(np.kron(np.eye(b.shape[0]), b.T) for b in a.blocks))


def _columns_in(algebra: BlockAlgebra, subspaces, ctx) -> Subspace:
    """Elements whose block-``i`` columns all lie in ``subspaces[i]``."""
    pieces = [np.kron(S.basis, np.eye(n)) for S, n in zip(subspaces, algebra.block_dims)]
    return Subspace(scipy.linalg.block_diag(*pieces), ctx)


def _rows_in(algebra: BlockAlgebra, subspaces, ctx) -> Subspace:
    """Elements whose block-``i`` rows (as vectors) all lie in ``subspaces[i]``."""
    pieces = [np.kron(np.eye(n), S.basis) for S, n in zip(subspaces, algebra.block_dims)]
    return Subspace(scipy.linalg.block_diag(*pieces), ctx)


def right_ideal(a: AlgebraElement, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
    """``aA`` built blockwise: matrices whose columns lie in ``Ran(a_i)``."""
    return _columns_in(a.algebra, [range_of(b, ctx) for b in a.blocks], ctx)


def right_annihilator(a: AlgebraElement, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
    """``{x : a x = 0}`` built blockwise: matrices whose columns lie in ``Ker(a_i)``."""
    return _columns_in(a.algebra, [kernel_of(b, ctx) for b in a.blocks], ctx)


def left_annihilator(a: AlgebraElement, ctx: NumericalContext = DEFAULT_CONTEXT) -> Subspace:
    """``{x : x a = 0}`` built blockwise: rows ``r`` with ``r a_i = 0``, i.e. in ``Ker(a_i^T)``."""
    return _rows_in(a.algebra, [kernel_of(b.T, ctx) for b in a.blocks], ctx)


@dataclass(frozen=True)
class ElementEpReport:
    blockwise: tuple[bool, ...]
    left_mult: EpReport

    @property
    def is_ep(self) -> bool:
        return all(self.blockwise)

    @property
    def agree(self) -> bool:
        return self.is_ep == self.left_mult.is_ep


def element_is_ep(a: AlgebraElement, ctx: NumericalContext = DEFAULT_CONTEXT, scale: float | None = None) -> ElementEpReport:
    """EP test for ``a``, blockwise and via ``L_a``; the two must agree.

    Every block is judged against the norm of the whole element (or ``scale``
    if larger), so blockwise rank decisions match those made on ``L_a``.
    """
    ref = max([scale or 0.0] + [op_norm(b) for b in a.blocks])
    return ElementEpReport(
        tuple(is_ep(b, ctx, ref).is_ep for b in a.blocks),
        is_ep(left_mult_matrix(a), ctx, ref),
    )


KERNEL_SUM_NOTE = (
    "kernel-sum condition taken as a^-1(0) + b^-1(0) with a^-1(0) = Ker(L_a) = "
    "{x : ax = 0}; the variant with {x : xa = 0} is reported separately and is "
    "not equivalent to EP-ness of ab"
)


@dataclass(frozen=True)
class IdealReport:
    a_ep: bool
    b_ep: bool
    ab_ep: bool
    ideal_equality: bool
    ideal_distance: float
    kernel_sum_left_mult: bool
    kernel_sum_right_mult: bool
    note: str = KERNEL_SUM_NOTE

    @property
    def ideal_equality_holds(self) -> bool:
        """If ``a``, ``b``, ``ab`` are EP then ``abA = aA & bA``."""
        return not (self.a_ep and self.b_ep and self.ab_ep) or self.ideal_equality

    @property
    def product_ep_criterion_holds(self) -> bool:
        """For EP ``a, b``: ``ab`` EP iff ideal equality and ``Ker L_ab = Ker L_a + Ker L_b``."""
        if not (self.a_ep and self.b_ep):
            return True
        return self.ab_ep == (self.ideal_equality and self.kernel_sum_left_mult)

    @property
    def right_annihilator_reading(self) -> bool:
        """Same biconditional with ``{x : xa = 0}`` annihilators; reported, not enforced."""
        if not (self.a_ep and self.b_ep):
            return True
        return self.ab_ep == (self.ideal_equality and self.kernel_sum_right_mult)

    @property
    def consistent(self) -> bool:
        return self.ideal_equality_holds and self.product_ep_criterion_holds


def ideal_equality_check(a: AlgebraElement, b: AlgebraElement, ctx: NumericalContext = DEFAULT_CONTEXT) -> IdealReport:
    ab = a @ b
    La, Lb, Lab = left_mult_matrix(a), left_mult_matrix(b), left_mult_matrix(ab)
    Ra, Rb, Rab = right_mult_matrix(a), right_mult_matrix(b), right_mult_matrix(ab)
    scale = op_norm(La) * op_norm(Lb)
    ab_ideal = range_of(Lab, ctx, scale)
    meet = intersect(range_of(La, ctx), range_of(Lb, ctx))
    distance = op_norm(ab_ideal.projector - meet.projector)
    ker_sum_left = subspace_sum(kernel_of(La, ctx), kernel_of(Lb, ctx))
    ker_sum_right = subspace_sum(kernel_of(Ra, ctx), kernel_of(Rb, ctx))
    return IdealReport(
        a_ep=element_is_ep(a, ctx).is_ep,
        b_ep=element_is_ep(b, ctx).is_ep,
        ab_ep=element_is_ep(ab, ctx, scale).is_ep,
        ideal_equality=distance <= ctx.eq_tol,
        ideal_distance=distance,
        kernel_sum_left_mult=equal(kernel_of(Lab, ctx, scale), ker_sum_left),
        kernel_sum_right_mult=equal(kernel_of(Rab, ctx, scale), ker_sum_right),
    )


def random_commuting_ep_elements(algebra: BlockAlgebra, seed=None, zero_prob: float = 0.3):
    """Per block, ``a_i = U D1 U^*`` and ``b_i = U D2 U^*``; ``a``, ``b`` and ``ab`` are EP."""
    rng = rng_for(seed)
    a_blocks, b_blocks = [], []
    for n in algebra.block_dims:
        U = random_unitary(n, rng)
        for out in (a_blocks, b_blocks):
            d = rng.uniform(0.5, 2.0, n) * np.exp(2j * np.pi * rng.uniform(size=n))
            d[rng.uniform(size=n) < zero_prob] = 0
            out.append((U * d) @ U.conj().T)
    return algebra.element(a_blocks), algebra.element(b_blocks)


def random_element(algebra: BlockAlgebra, seed=None) -> AlgebraElement:
    """Element with Gaussian blocks; some blocks are made nilpotent or rank deficient."""
    rng = rng_for(seed)
    blocks = []
    for n in algebra.block_dims:
        kind = rng.integers(3)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if kind == 1 and n > 1:
            M = np.triu(M, k=1)
        elif kind == 2 and n > 1:
            M = M @ np.diag((np.arange(n) > 0).astype(float)) @ M.conj().T
        blocks.append(M)
    return algebra.element(blocks)
