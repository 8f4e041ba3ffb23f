import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eplab.compacts import (
    BlockAlgebra,
    from_coordinates,
    ideal_equality_check,
    left_annihilator,
    left_mult_matrix,
    random_commuting_ep_elements,
    random_element,
    right_annihilator,
    right_ideal,
    right_mult_matrix,
)
from eplab.errors import DimensionError
from eplab.ep import is_ep
from eplab.subspace import equal, kernel_of, range_of

dims = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)


def test_left_mult_examples():
    A1 = BlockAlgebra((1,))
    assert np.array_equal(left_mult_matrix(A1.element([[[2]]])), [[2]])
    A = BlockAlgebra((2, 1))
    assert np.array_equal(left_mult_matrix(A.identity()), np.eye(5))
    a = A.element([np.diag([1, 0]), [[0]]])
    assert np.linalg.matrix_rank(left_mult_matrix(a)) == 2


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 2**32 - 1))
def test_mult_matrices_match_products(block_dims, seed):
    alg = BlockAlgebra(block_dims)
    rng = np.random.default_rng(seed)
    a, x = random_element(alg, rng), random_element(alg, rng)
    assert np.allclose(left_mult_matrix(a) @ x.coordinates(), (a @ x).coordinates())
    assert np.allclose(right_mult_matrix(a) @ x.coordinates(), (x @ a).coordinates())
    y = from_coordinates(alg, x.coordinates())
    assert all(np.array_equal(p, q) for p, q in zip(x.blocks, y.blocks))


def test_element_is_ep_examples():
    from eplab.compacts import element_is_ep

    A = BlockAlgebra((2, 2))
    assert element_is_ep(A.identity()).is_ep
    assert element_is_ep(A.zero()).is_ep
    nil = A.element([np.eye(2), [[0, 1], [0, 0]]])
    rep = element_is_ep(nil)
    assert not rep.is_ep and rep.blockwise == (True, False) and rep.agree


@settings(max_examples=100, deadline=None)
@given(dims, st.integers(0, 2**32 - 1))
def test_blockwise_matches_left_mult(block_dims, seed):
    from eplab.compacts import element_is_ep

    rep = element_is_ep(random_element(BlockAlgebra(block_dims), seed))
    assert rep.agree


@settings(max_examples=30, deadline=None)
@given(dims, st.integers(0, 2**32 - 1))
def test_blockwise_ideals_match_left_mult(block_dims, seed):
    a = random_element(BlockAlgebra(block_dims), seed)
    La = left_mult_matrix(a)
    assert equal(right_ideal(a), range_of(La))
    assert equal(right_annihilator(a), kernel_of(La))
    assert equal(left_annihilator(a), kernel_of(right_mult_matrix(a)))


def test_ideal_examples():
    A = BlockAlgebra((2,))
    p = A.element([np.diag([1, 0])])
    rep = ideal_equality_check(p, p)
    assert rep.a_ep and rep.ab_ep and rep.ideal_equality and rep.consistent
    q = A.element([np.diag([0, 1])])
    rep = ideal_equality_check(p, q)
    assert rep.ab_ep and rep.ideal_equality and rep.kernel_sum_left_mult


def test_annihilator_readings_differ():
    # b is a unitary swap, so ab is nilpotent while abA = aA = aA & bA
    A = BlockAlgebra((2,))
    a = A.element([np.diag([1, 0])])
    b = A.element([np.array([[0, 1], [1, 0]])])
    rep = ideal_equality_check(a, b)
    assert rep.a_ep and rep.b_ep and not rep.ab_ep
    assert rep.ideal_equality
    assert not rep.kernel_sum_left_mult and rep.kernel_sum_right_mult
    assert rep.product_ep_criterion_holds and not rep.right_annihilator_reading
    assert rep.consistent


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 2**32 - 1))
def test_commuting_elements_satisfy_ideal_equality(block_dims, seed):
    a, b = random_commuting_ep_elements(BlockAlgebra(block_dims), seed)
    rep = ideal_equality_check(a, b)
    assert rep.a_ep and rep.b_ep and rep.ab_ep
    assert rep.ideal_equality and rep.kernel_sum_left_mult and rep.consistent


def test_block_shape_validation():
    A = BlockAlgebra((2, 3))
    with pytest.raises(DimensionError):
        A.element([np.eye(2), np.eye(2)])
    with pytest.raises(DimensionError):
        A.identity() @ BlockAlgebra((2,)).identity()
    with pytest.raises(ValueError):
        BlockAlgebra(())


def test_left_mult_is_ep_iff_blocks_are(rng):
    alg = BlockAlgebra((3, 2))
    for _ in range(20):
        a = random_element(alg, rng)
        blocks_ep = all(is_ep(b, scale=np.linalg.norm(left_mult_matrix(a), 2)).is_ep for b in a.blocks)
        assert blocks_ep == is_ep(left_mult_matrix(a)).is_ep
