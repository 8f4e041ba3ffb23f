"""Exact index-level model of basis-permuting operators on the standard module.

Operators are finite compositions of two primitives acting on the
orthonormal basis ``xi_1, xi_2, ...``: injective index maps (each basis
vector goes to another basis vector) and 0/1 diagonal projections. Every
such composition sends a basis vector to a basis vector or to zero, so
ranges and kernels are spans of index sets and can be computed exactly.

Work happens on a window ``[1, N]``. A query about index ``j`` is only
trusted when every intermediate index it visits stays inside the window.
Indices that leave it are reported as boundary and kept out of verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CutoffError, UnsupportedCompositionError

IndexRule = Callable[[int], Optional[int]]


@dataclass(frozen=True)
class _Bijection:
    forward: IndexRule
    backward: IndexRule
    name: str

    def adjoint(self):
        return _Bijection(self.backward, self.forward, f"{self.name}*")


@dataclass(frozen=True)
class _Diagonal:
    keep: Callable[[int], bool]
    name: str

    def forward(self, j: int) -> Optional[int]:
        return j if self.keep(j) else None

    def adjoint(self):
        return self


@dataclass(frozen=True)
class IndexMapOperator:
    """Composition of index primitives, applied right to left.

    ``kind`` is ``basis_bijection`` or ``diagonal_01`` for pure operators and
    ``partial_isometry`` for mixed compositions.
    """

    factors: tuple
    cutoff: int
    name: str = ""

    def __post_init__(self):
        if self.cutoff < 1:
            raise CutoffError("cutoff must be positive")
        if self.kind == "basis_bijection":
            self._check_injective()

    @property
    def kind(self) -> str:
        if all(isinstance(f, _Bijection) for f in self.factors):
            return "basis_bijection"
        if all(isinstance(f, _Diagonal) for f in self.factors):
            return "diagonal_01"
        return "partial_isometry"

    def _check_injective(self):
        seen = {}
        for j in range(1, self.cutoff + 1):
            image, _ = self.trace(j, limit=None)
            back = image
            for f in self.factors:
                back = f.backward(back)
            if image in seen or back != j:
                raise ValueError(f"{self.name or 'operator'} is not injective at index {j}")
            seen[image] = j

    def trace(self, j: int, limit: Optional[int] = -1) -> tuple[Optional[int], bool]:
        """Image index of ``xi_j`` (``None`` for zero) and whether the path stayed in ``[1, limit]``.

        ``limit=-1`` means the operator's own cutoff; ``None`` disables the check.
        """
        if limit == -1:
            limit = self.cutoff
        inside = True
        for f in reversed(self.factors):
            j = f.forward(j)
            if j is None:
                return None, inside
            if j < 1:
                raise ValueError(f"index rule of {f.name} left the positive integers")
            if limit is not None and j > limit:
                inside = False
        return j, inside

    def __call__(self, j: int) -> Optional[int]:
        return self.trace(j, limit=None)[0]

    def adjoint(self) -> IndexMapOperator:
        return IndexMapOperator(tuple(f.adjoint() for f in reversed(self.factors)), self.cutoff, f"({self.name})*")

    def __matmul__(self, other: IndexMapOperator) -> IndexMapOperator:
        return compose(self, other)


def basis_bijection(forward: IndexRule, backward: IndexRule, cutoff: int, name: str = "") -> IndexMapOperator:
    return IndexMapOperator((_Bijection(forward, backward, name),), cutoff, name)


def diagonal_01(keep: Callable[[int], bool], cutoff: int, name: str = "") -> IndexMapOperator:
    return IndexMapOperator((_Diagonal(keep, name),), cutoff, name)


def compose(A: IndexMapOperator, B: IndexMapOperator) -> IndexMapOperator:
    """``A o B`` (apply ``B`` first)."""
    if not isinstance(A, IndexMapOperator) or not isinstance(B, IndexMapOperator):
        raise UnsupportedCompositionError("can only compose IndexMapOperator instances")
    if A.cutoff != B.cutoff:
        raise UnsupportedCompositionError(f"cutoffs differ: {A.cutoff} vs {B.cutoff}")
    return IndexMapOperator(A.factors + B.factors, A.cutoff, f"{A.name}{B.name}")


def adjoint_im(A: IndexMapOperator) -> IndexMapOperator:
    return A.adjoint()


@dataclass(frozen=True)
class IndexSet:
    """Sorted basis indices in ``[1, cutoff]``, plus the boundary indices left undecided."""

    indices: tuple[int, ...]
    cutoff: int
    boundary: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(set(self.indices))))
        object.__setattr__(self, "boundary", tuple(sorted(set(self.boundary))))

    def __contains__(self, j: int) -> bool:
        return j in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    @property
    def decided(self) -> frozenset[int]:
        return frozenset(range(1, self.cutoff + 1)) - frozenset(self.boundary)


def range_indices(A: IndexMapOperator, N: Optional[int] = None) -> IndexSet:
    """Indices ``j`` with ``xi_j`` in the range of ``A``, i.e. ``A^* xi_j != 0``."""
    N = A.cutoff if N is None else N
    adj = A.adjoint()
    inside, boundary = [], []
    for j in range(1, N + 1):
        image, ok = adj.trace(j, N)
        if not ok:
            boundary.append(j)
        elif image is not None:
            inside.append(j)
    return IndexSet(tuple(inside), N, tuple(boundary))


def kernel_indices(A: IndexMapOperator, N: Optional[int] = None) -> IndexSet:
    """Indices ``j`` with ``A xi_j = 0``."""
    N = A.cutoff if N is None else N
    inside, boundary = [], []
    for j in range(1, N + 1):
        image, ok = A.trace(j, N)
        if not ok:
            boundary.append(j)
        elif image is None:
            inside.append(j)
    return IndexSet(tuple(inside), N, tuple(boundary))


@dataclass(frozen=True)
class ExactEpVerdict:
    is_ep: bool
    range_equal: bool
    orth_decomp: bool
    missing: tuple[int, ...]


def exact_is_ep(A: IndexMapOperator, N: Optional[int] = None) -> ExactEpVerdict:
    """EP test on decided indices: ``Ran A = Ran A^*`` and every ``xi_j`` lies in ``Ran A`` or ``Ker A``."""
    N = A.cutoff if N is None else N
    ran, ran_adj = range_indices(A, N), range_indices(A.adjoint(), N)
    ker = kernel_indices(A, N)
    decided = ran.decided & ran_adj.decided & ker.decided
    r = set(ran.indices) & decided
    range_equal = r == set(ran_adj.indices) & decided
    missing = tuple(sorted(decided - r - set(ker.indices)))
    overlap = r & set(ker.indices)
    orth = not missing and not overlap
    return ExactEpVerdict(range_equal and orth, range_equal, orth, missing)


def _t_forward(j: int) -> int:
    if j == 1:
        return 2
    return j + 2 if j % 2 == 0 else j - 2


def _t_backward(j: int) -> int:
    if j == 2:
        return 1
    return j - 2 if j % 2 == 0 else j + 2


def build_example34(N: int) -> tuple[IndexMapOperator, IndexMapOperator]:
    """The shift ``xi_1 -> xi_2, xi_2j -> xi_{2j+2}, xi_{2j+1} -> xi_{2j-1}`` and the even-index projection."""
    if N < 6 or N % 2:
        raise CutoffError(f"cutoff must be an even integer >= 6, got {N}")
    T = basis_bijection(_t_forward, _t_backward, N, "T")
    S = diagonal_01(lambda j: j % 2 == 0, N, "S")
    return T, S


def truncated_matrix(A: IndexMapOperator, N: Optional[int] = None) -> np.ndarray:
    """Compression ``P_N A P_N`` as an ``N x N`` 0/1 matrix (images beyond ``N`` are dropped)."""
    N = A.cutoff if N is None else N
    M = np.zeros((N, N), dtype=np.complex128)
    for j in range(1, N + 1):
        image = A(j)
        if image is not None and image <= N:
            M[image - 1, j - 1] = 1.0
    return M


@dataclass(frozen=True)
class ShiftProjectionReport:
    cutoff: int
    ts_range_excludes_2: bool
    ts_kernel_excludes_2: bool
    t_preserves_even_span: bool
    s_adjoint_preserves_ran_t: bool
    t_is_ep: bool
    s_is_ep: bool
    ts_is_ep: bool
    ts_range_sample: tuple[int, ...]
    ts_kernel_sample: tuple[int, ...]

    def verdicts(self) -> dict[str, bool]:
        """Cutoff-independent claims."""
        return {
            "index_2_outside_ran_TS": self.ts_range_excludes_2,
            "index_2_outside_ker_TS": self.ts_kernel_excludes_2,
            "T_maps_ran_S_into_ran_S": self.t_preserves_even_span,
            "S_adjoint_maps_ran_T_into_ran_T": self.s_adjoint_preserves_ran_t,
            "T_is_EP": self.t_is_ep,
            "S_is_EP": self.s_is_ep,
            "TS_is_EP": self.ts_is_ep,
        }

    @property
    def converse_fails(self) -> bool:
        """Both inclusions hold, ``T`` and ``S`` are EP, yet ``TS`` is not."""
        v = self.verdicts()
        return (
            v["T_maps_ran_S_into_ran_S"]
            and v["S_adjoint_maps_ran_T_into_ran_T"]
            and v["T_is_EP"]
            and v["S_is_EP"]
            and v["index_2_outside_ran_TS"]
            and v["index_2_outside_ker_TS"]
            and not v["TS_is_EP"]
        )


def verify_example34(N: int = 50) -> ShiftProjectionReport:
    if N < 10:
        raise CutoffError(f"cutoff must be at least 10, got {N}")
    T, S = build_example34(N)
    TS = T @ S
    ran_ts, ker_ts = range_indices(TS, N), kernel_indices(TS, N)
    ran_s, ran_t = range_indices(S, N), range_indices(T, N)

    # T maps evens to evens: check on every even index whose image stays inside
    evens_ok = True
    for j in ran_s:
        image, ok = T.trace(j, N)
        if ok and (image is None or image not in ran_s):
            evens_ok = False

    adj_ok = True
    S_adj = S.adjoint()
    for j in ran_t:
        image, ok = S_adj.trace(j, N)
        if ok and image is not None and image not in ran_t and image not in ran_t.boundary:
            adj_ok = False

    return ShiftProjectionReport(
        cutoff=N,
        ts_range_excludes_2=2 not in ran_ts and 2 not in ran_ts.boundary,
        ts_kernel_excludes_2=2 not in ker_ts and 2 not in ker_ts.boundary,
        t_preserves_even_span=evens_ok,
        s_adjoint_preserves_ran_t=adj_ok,
        t_is_ep=exact_is_ep(T, N).is_ep,
        s_is_ep=exact_is_ep(S, N).is_ep,
        ts_is_ep=exact_is_ep(TS, N).is_ep,
        ts_range_sample=ran_ts.indices[:5],
        ts_kernel_sample=ker_ts.indices[:5],
    )
