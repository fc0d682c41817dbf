from fractions import Fraction

import pytest

from src.core.errors import NoRayThroughPoint
from src.core.formal_series import ClassExponent, extract_omega_tilde, extract_omega_tilde_graded
from src.core.lattice import IntVec2, RatPoint
from src.invariants.relative_gw import admissible_rays
from src.scattering.tropical import (
    TreeBuilder, multinomial, omega_trop, omega_trop_graded, tree_weight_sums, tropical_discs,
)


def test_multinomial():
    assert multinomial([2, 1]) == 3
    assert multinomial([1, 1, 1]) == 6
    assert multinomial([3]) == 1


def test_toy_ray_is_one_tree(toy_diagram):
    (new,) = toy_diagram.scattered_rays()
    trees = tropical_discs(toy_diagram, new)
    assert len(trees) == 1
    tree = trees[0]
    assert tree.weight == 1
    assert tree.leaves() == ["a", "b"]
    assert tree.root.is_balanced()
    assert tree.edge_count == 3
    assert tree.total_class == ClassExponent(IntVec2(1, 1), 2)


def test_initial_rays_are_leaves_with_multiple_covers(toy_diagram):
    builder = TreeBuilder(toy_diagram)
    initial = [ray for ray in toy_diagram.rays if ray.provenance.is_initial]
    assert len(initial) == 2
    for ray in initial:
        trees = tropical_discs(toy_diagram, ray, builder)
        assert all(tree.root.is_leaf for tree in trees)
        assert {t.total_class: t.weight for t in trees} == {
            ClassExponent(ray.direction, 1): Fraction(1),
            ClassExponent(ray.direction * 2, 2): Fraction(-1, 4),
        }


def test_omega_trop_on_scattered_ray(toy_diagram):
    assert omega_trop(toy_diagram, RatPoint.of(1, 1), IntVec2(1, 1)) == {1: Fraction(1)}
    with pytest.raises(NoRayThroughPoint):
        omega_trop(toy_diagram, RatPoint.of(1, 2), IntVec2(1, 1))
    assert omega_trop_graded(toy_diagram, RatPoint.of(1, 1), IntVec2(1, 1)) == {(1, 2): Fraction(1)}


def _tree_sums_match_walls(diagram):
    builder = TreeBuilder(diagram)
    for ray in diagram.rays:
        sums = tree_weight_sums(tropical_discs(diagram, ray, builder))
        for (j, grade), value in extract_omega_tilde_graded(ray.wall, ray.direction).items():
            assert sums.get(ClassExponent(ray.direction * j, grade), Fraction(0)) == value


@pytest.mark.slow
def test_trees_sum_to_open_invariants_order_three(cps_d3):
    _tree_sums_match_walls(cps_d3)


@pytest.mark.slow
def test_three_torsion_rays_at_degree_two(cps_d6):
    three_torsion = [a for a in admissible_rays(cps_d6) if a.torsion == 3]
    assert len(three_torsion) == 3
    rays = cps_d6.by_id()
    for a in three_torsion:
        ray = rays[a.ray_id]
        assert extract_omega_tilde(ray.wall, ray.direction)[6] == Fraction(21, 4)
        sixes = [t.weight for t in tropical_discs(cps_d6, ray) if t.total_class.m == ray.direction * 6]
        assert sorted(sixes) == [Fraction(-9, 2), Fraction(-9, 2), Fraction(3, 4), Fraction(27, 2)]
        assert sum(sixes) == Fraction(21, 4)
