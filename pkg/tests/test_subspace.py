import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from eplab.errors import DimensionError
from eplab.linalg import NumericalContext
from eplab.sampling import complex_gaussian, random_exact_rank
from eplab.subspace import (
    Subspace,
    complement,
    containment_gap,
    contains,
    distance,
    equal,
    intersect,
    is_orthogonal_sum,
    kernel_of,
    principal_angles,
    range_of,
    subspace_sum,
)

E = np.eye(3)


def span(*cols):
    return Subspace.span(np.column_stack(cols))


def test_range_examples():
    assert equal(range_of(np.diag([1, 0])), span(E[:2, 0]))
    Z = range_of(np.zeros((3, 3)))
    assert Z.dim == 0 and Z.ambient_dim == 3
    assert equal(range_of([[1, 1], [0, 0]]), span([1, 0]))


def test_kernel_examples():
    assert kernel_of(np.eye(3)).dim == 0
    assert equal(kernel_of([[0, 1], [0, 0]]), span([1, 0]))
    assert equal(kernel_of([[1, 1], [0, 0]]), span([1, -1]))


def test_complement_examples():
    assert equal(complement(span([1, 0])), span([0, 1]))
    assert complement(Subspace.full(4)).dim == 0
    assert equal(complement(Subspace.zero(2)), Subspace.full(2))


def test_intersection_examples():
    assert intersect(span(E[:, 0]), span(E[:, 1])).dim == 0
    S = span(E[:, 0], E[:, 2])
    assert equal(S & S, S)
    assert equal(span(E[:, 0], E[:, 1]) & span(E[:, 1], E[:, 2]), span(E[:, 1]))


def test_sum_examples():
    S = span(E[:, 0])
    assert equal(S + Subspace.zero(3), S)
    assert equal(span(E[:, 0]) + span(E[:, 1]), span(E[:, 0], E[:, 1]))


def test_equal_and_contains_examples():
    S = span([1, 1])
    assert equal(S, S)
    assert not equal(span([1, 0]), span([0, 1]))
    assert equal(S, span([1, 1 + 1e-14]))
    assert contains(Subspace.full(2), S) and not contains(S, Subspace.full(2))
    assert containment_gap(span([1, 0]), span([0, 1])) == pytest.approx(1.0)


def test_ambient_mismatch():
    with pytest.raises(DimensionError):
        intersect(Subspace.full(2), Subspace.full(3))
    with pytest.raises(DimensionError):
        equal(Subspace.full(2), Subspace.zero(3))


def test_non_orthonormal_basis_rejected():
    with pytest.raises(ValueError):
        Subspace(np.array([[2.0], [0.0]]))


def test_ill_determined_flag_propagates():
    T = np.diag([1.0, 1e-9, 1e-12])
    S = range_of(T, NumericalContext())
    assert S.dim == 2 and S.ill_determined
    assert (S + Subspace.zero(3)).ill_determined


def test_range_projects_T(rng):
    T = random_exact_rank(5, 4, 2, rng)
    P = range_of(T).projector
    assert np.linalg.norm(P @ T - T) <= 1e-9 * np.linalg.norm(T)
    K = kernel_of(T)
    assert K.dim == 2 and np.linalg.norm(T @ K.basis) <= 1e-9 * np.linalg.norm(T)


def random_subspace(rng, n, k):
    return range_of(complex_gaussian(rng, (n, k)))


def pairs_with_shared_part():
    @st.composite
    def build(draw):
        n = draw(st.integers(1, 6))
        shared = draw(st.integers(0, n))
        k1 = draw(st.integers(0, n - shared))
        k2 = draw(st.integers(0, n - shared))
        rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
        C = complex_gaussian(rng, (n, shared))
        A = range_of(np.hstack([C, complex_gaussian(rng, (n, k1))]))
        B = range_of(np.hstack([C, complex_gaussian(rng, (n, k2))]))
        return A, B

    return build()


@settings(max_examples=60, deadline=None)
@given(pairs_with_shared_part())
def test_intersection_matches_principal_angle_oracle(pair):
    A, B = pair
    meet = intersect(A, B)
    if A.dim and B.dim:
        angles = scipy.linalg.subspace_angles(A.basis, B.basis)
        assert meet.dim == int(np.count_nonzero(angles < 1e-6))
        assert np.allclose(np.sort(principal_angles(A, B)), np.sort(angles), atol=1e-7)
    else:
        assert meet.dim == 0
    assert contains(A, meet) and contains(B, meet)


@settings(max_examples=60, deadline=None)
@given(pairs_with_shared_part())
def test_lattice_laws(pair):
    A, B = pair
    join, meet = subspace_sum(A, B), intersect(A, B)
    assert join.dim == A.dim + B.dim - meet.dim
    assert equal(complement(join), intersect(complement(A), complement(B)))
    assert equal(complement(complement(A)), A)
    assert equal(meet, B & A) and equal(join, B + A)
    assert contains(join, A) and contains(join, B)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_associativity(n, seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_subspace(rng, n, int(rng.integers(0, n + 1))) for _ in range(3))
    assert equal((A + B) + C, A + (B + C))
    assert equal((A & B) & C, A & (B & C))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_range_kernel_complement_identities(m, n, data):
    r = data.draw(st.integers(0, min(m, n)))
    T = random_exact_rank(m, n, r, data.draw(st.integers(0, 2**32 - 1)))
    Th = T.conj().T
    assert equal(complement(range_of(T)), kernel_of(Th))
    assert equal(complement(kernel_of(T)), range_of(Th))
    assert is_orthogonal_sum(range_of(T), kernel_of(Th))


def test_range_and_kernel_match_scipy_oracle(rng):
    T = random_exact_rank(6, 5, 3, rng)
    assert distance(range_of(T), Subspace(scipy.linalg.orth(T))) <= 1e-9
    assert distance(kernel_of(T), Subspace(scipy.linalg.null_space(T))) <= 1e-9
