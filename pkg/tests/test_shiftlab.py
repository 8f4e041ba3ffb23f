import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eplab.errors import CutoffError, UnsupportedCompositionError
from eplab.ep import is_ep
from eplab.shiftlab import (
    build_example34,
    compose,
    diagonal_01,
    exact_is_ep,
    kernel_indices,
    range_indices,
    truncated_matrix,
    verify_example34,
)


def test_shift_on_first_indices():
    T, S = build_example34(10)
    assert [T(j) for j in (1, 3, 5, 2, 4)] == [2, 1, 3, 4, 6]
    assert [S(j) for j in (1, 2, 3, 4)] == [None, 2, None, 4]
    assert T.kind == "basis_bijection" and S.kind == "diagonal_01"
    assert (T @ S).kind == "partial_isometry"


@given(st.integers(1, 200))
def test_adjoint_inverts_shift(j):
    T, _ = build_example34(10)
    assert T.adjoint()(T(j)) == j
    assert T(T.adjoint()(j)) == j


def test_product_range_and_kernel():
    T, S = build_example34(20)
    TS = T @ S
    ran = range_indices(TS, 20)
    assert ran.indices == tuple(range(4, 21, 2))
    assert ran.boundary == (19,)
    ker = kernel_indices(TS, 20)
    assert ker.indices == tuple(range(1, 20, 2))
    assert ker.boundary == (20,)
    assert 2 not in ran and 2 not in ker


def test_shift_range_covers_window():
    T, _ = build_example34(20)
    ran = range_indices(T, 20)
    assert set(ran.indices) | set(ran.boundary) == set(range(1, 21))
    assert set(ran.indices) >= set(range(1, 19))


def test_exact_ep_verdicts():
    T, S = build_example34(20)
    assert exact_is_ep(T).is_ep and exact_is_ep(S).is_ep
    v = exact_is_ep(T @ S)
    assert not v.is_ep and 2 in v.missing


@pytest.mark.parametrize("N", [10, 20, 50, 100])
def test_converse_fails_at_every_cutoff(N):
    rep = verify_example34(N)
    assert rep.converse_fails
    assert rep.ts_range_sample[:3] == (4, 6, 8)
    assert rep.ts_kernel_sample[:3] == (1, 3, 5)


def test_cutoff_errors():
    for N in (8, 11, 0):
        with pytest.raises(CutoffError):
            verify_example34(N)
    with pytest.raises(CutoffError):
        build_example34(7)
    with pytest.raises(CutoffError):
        diagonal_01(lambda j: True, 0)


def test_composition_errors():
    T, _ = build_example34(10)
    _, S = build_example34(12)
    with pytest.raises(UnsupportedCompositionError):
        compose(T, S)
    with pytest.raises(UnsupportedCompositionError):
        compose(T, np.eye(10))


def test_truncation_agrees_on_interior():
    N = 40
    T, S = build_example34(N)
    M = truncated_matrix(T @ S)
    assert np.array_equal(M, truncated_matrix(T) @ truncated_matrix(S))
    # interior of the window: rows and columns away from both ends
    inner = slice(4, N - 4)
    col_norms = np.linalg.norm(M, axis=0)
    assert all(col_norms[j - 1] == 0 for j in kernel_indices(T @ S).indices)
    row_norms = np.linalg.norm(M, axis=1)[inner]
    expected = np.array([1.0 if (j % 2 == 0 and j >= 4) else 0.0 for j in range(5, N - 3)])
    assert np.array_equal(row_norms, expected)
    # the compression of S is an orthogonal projection, hence EP numerically too
    assert is_ep(truncated_matrix(S)).is_ep
