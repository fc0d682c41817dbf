from fractions import Fraction

import pytest

from src.core.lattice import (
    IntVec2, Matrix2, RatPoint, format_rat, integer_kernel, is_positive_multiple, point_on_segment, sort_ccw,
    unipotent_conjugacy_index,
)
from src.core.affine_base import rational_direction


def test_pairing_is_antisymmetric():
    v, w = IntVec2(1, -1), IntVec2(2, 1)
    assert v.pairing(w) == 3
    assert w.pairing(v) == -3
    assert v.pairing(v) == 0


def test_primitive_and_content():
    assert IntVec2(6, -4).primitive() == IntVec2(3, -2)
    assert IntVec2(6, -4).content() == 2
    with pytest.raises(ValueError):
        IntVec2(0, 0).primitive()


def test_matrix_inverse_is_exact():
    m = Matrix2(2, 1, -1, 0)
    assert m.inverse() == Matrix2(0, -1, 1, 2)
    assert (m @ m.inverse()).is_identity()
    with pytest.raises(ValueError):
        Matrix2(2, 0, 0, 1).inverse()


def test_format_rat():
    assert format_rat(Fraction(3)) == "3"
    assert format_rat(Fraction(-1, 2)) == "-1/2"
    assert format_rat(Fraction(21, 4)) == "21/4"


def test_sort_ccw_starts_at_reference():
    vs = [IntVec2(0, -1), IntVec2(-1, 0), IntVec2(1, 0), IntVec2(0, 1), IntVec2(1, 1)]
    assert sort_ccw(vs, lambda v: v) == [IntVec2(1, 0), IntVec2(1, 1), IntVec2(0, 1), IntVec2(-1, 0), IntVec2(0, -1)]


def test_unipotent_kernel_and_index():
    m = Matrix2(1, 9, 0, 1)
    assert unipotent_conjugacy_index(m) == 9
    assert integer_kernel(m) in (IntVec2(1, 0), IntVec2(-1, 0))
    assert unipotent_conjugacy_index(Matrix2(2, 1, -1, 0)) == 1


def test_positive_multiple_and_segments():
    assert is_positive_multiple((2, 4), (1, 2))
    assert not is_positive_multiple((-2, -4), (1, 2))
    a, b = RatPoint.of(0, 0), RatPoint.of(2, 2)
    assert point_on_segment(RatPoint.of(1, 1), a, b)
    assert not point_on_segment(RatPoint.of(3, 3), a, b)


def test_rational_direction_splits_length():
    v, length = rational_direction((Fraction(1, 2), Fraction(1, 4)))
    assert v == IntVec2(2, 1)
    assert length == Fraction(1, 4)


@pytest.mark.parametrize("m", [Matrix2(2, 1, -1, 0), Matrix2(-1, 4, -1, 3), Matrix2(-1, 1, -4, 3)])
def test_gluing_matrices_through_sympy(m):
    assert Matrix2.from_sympy(m.to_sympy()) == m
    assert (m @ m.inverse()).is_identity()
    v = integer_kernel(m)
    assert m.apply(v) == v
    assert v.content() == 1


def test_kernel_needs_rank_one():
    with pytest.raises(ValueError):
        integer_kernel(Matrix2.identity())
