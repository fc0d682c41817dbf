from fractions import Fraction

import random

import pytest

from src.core.affine_base import (
    AffineBase, cross_cut, loop_at_infinity, path_from_waypoints, path_monodromy, region_of, scale, trace_ray,
    transport,
)
from src.core.errors import InvalidPoint, OnBoundary, PathThroughSingularity, RayHitsSingularity, TrivialMonodromy
from src.core.lattice import IntVec2, Matrix2, RatPoint, is_positive_multiple, unipotent_conjugacy_index
from src.invariants.relative_gw import infinity_direction


def test_singularities_are_focus_focus(cps_base):
    for s in cps_base.singularities:
        assert s.is_type_a1()
        assert s.matrix.apply(s.invariant_dir) == s.invariant_dir


def test_glue_maps_cut_plus_onto_cut_minus(cps_base):
    u1 = cps_base.singularity("u1")
    q = RatPoint(Fraction(1, 2), Fraction(3, 2))
    assert u1.on_cut_plus(q)
    twin = u1.glue(q)
    assert twin == RatPoint(Fraction(3, 2), Fraction(1, 2))
    assert u1.on_cut_minus(twin)
    assert u1.unglue(twin) == q
    assert cps_base.canonical(twin) == q


def test_discarded_wedge_is_rejected(cps_base):
    with pytest.raises(InvalidPoint):
        cps_base.validate_point(RatPoint.of(1, 1))


def test_loop_at_infinity_has_index_nine(cps_base):
    m = loop_at_infinity(cps_base)
    assert m.trace() == 2
    assert unipotent_conjugacy_index(m) == 9
    assert infinity_direction(cps_base) == IntVec2(1, 0)


def test_single_singularity_kernel_sign(cps_base):
    u1 = cps_base.singularity("u1")
    assert infinity_direction(AffineBase("u1-only", singularities=(u1,))) == IntVec2(1, -1)


def test_flat_base_has_trivial_monodromy(toy_base):
    with pytest.raises(TrivialMonodromy):
        infinity_direction(toy_base)


def test_path_through_singularity(cps_base):
    with pytest.raises(PathThroughSingularity):
        path_from_waypoints(cps_base, [RatPoint(Fraction(-1), Fraction(-1, 2)), RatPoint(Fraction(1), Fraction(-1, 2))])


def test_region_scale_in_x_region(cps_base):
    region = region_of(cps_base, RatPoint.of(1, 0))
    assert region.name == "XRegion"
    assert scale(IntVec2(1, 0), region) == 1


def test_traced_rays_refract_by_gluing_matrices(cps_base):
    for s in cps_base.singularities:
        for sign in (1, -1):
            path = trace_ray(cps_base, s.position, s.invariant_dir * sign)
            assert path.segments[0].start == s.position
            assert path.final_direction == path_monodromy(path).apply(s.invariant_dir * sign)
            for seg in path.segments:
                assert cps_base.in_box(seg.start, strict=False)
                assert cps_base.in_box(seg.end, strict=False)


def test_box_bounds_rays(toy_base):
    path = trace_ray(toy_base, RatPoint.of(0, 0), IntVec2(1, 1))
    assert path.escaped
    assert path.segments[-1].end == RatPoint.of(8, 8)
    assert is_positive_multiple(path.final_direction, (1, 1))


# ===== Regions & scale =====

def test_region_examples(cps_base):
    assert region_of(cps_base, RatPoint(Fraction(1), Fraction(-1, 4))).name == "XRegion"
    assert region_of(cps_base, RatPoint(Fraction(-1, 4), Fraction(-1, 4))).name == "XYInvRegion"
    assert region_of(cps_base, RatPoint(Fraction(1, 4), Fraction(3))).name == "YRegion"
    with pytest.raises(OnBoundary):
        region_of(cps_base, RatPoint.of(0, 0))


@pytest.mark.parametrize("name", ["u1", "u2", "u3"])
def test_region_boundary_runs_along_cuts(cps_base, name):
    s = cps_base.singularity(name)
    delta = Fraction(1, 1000)
    # cut_plus bounds the region opening at s, cut_minus the one closing at s
    for cut, side, role in ((s.cut_plus, 1, "opening"), (s.cut_minus, -1, "closing")):
        q = s.position.shifted(cut, 2)
        inward = (-cut.b * side, cut.a * side)
        with pytest.raises(OnBoundary):
            region_of(cps_base, q)
        assert getattr(region_of(cps_base, q.shifted(inward, delta)), role) == name
        with pytest.raises(InvalidPoint):
            region_of(cps_base, q.shifted(inward, -delta))


def test_region_boundary_through_origin(cps_base):
    delta = Fraction(1, 1000)
    q = RatPoint(Fraction(1, 4), Fraction(1, 4))
    with pytest.raises(OnBoundary):
        region_of(cps_base, q)
    assert region_of(cps_base, q.shifted((1, -1), delta)).name == "XRegion"
    assert region_of(cps_base, q.shifted((-1, 1), delta)).name == "YRegion"


def test_scale_examples(cps_base):
    x_region = region_of(cps_base, RatPoint.of(1, 0))
    assert scale(IntVec2(3, 1), x_region) == 3
    assert scale(IntVec2(0, 1), x_region) == 0


@pytest.mark.parametrize("a, b", [(-1, -2), (-1, -3), (-2, -3), (-2, -5), (-4, -5)])
def test_scale_after_leaving_xy_inverse_region(cps_base, a, b):
    u2 = cps_base.singularity("u2")
    before = region_of(cps_base, RatPoint(Fraction(-1, 4), Fraction(-1, 4)))
    after = region_of(cps_base, RatPoint.of(1, 0))
    v = IntVec2(a, b)
    assert scale(v, before) > 0
    # leaving through u2's cut_minus identifies it with cut_plus
    moved = scale(cross_cut(v, u2, -1), after)
    assert moved == 3 * a - 4 * b
    assert moved >= 4


def test_scale_at_minus_one_minus_two(cps_base):
    u2 = cps_base.singularity("u2")
    assert cross_cut(IntVec2(-1, -2), u2, -1) == IntVec2(5, 1)
    assert scale(cross_cut(IntVec2(-1, -2), u2, -1), region_of(cps_base, RatPoint.of(1, 0))) == 5

# ===== Transport =====

def test_cross_cut_examples(cps_base):
    u1, u2 = cps_base.singularity("u1"), cps_base.singularity("u2")
    assert cross_cut(IntVec2(0, 1), u1, 1) == IntVec2(1, 0)
    assert cross_cut(IntVec2(1, -1), u1, 1) == IntVec2(1, -1)
    assert cross_cut(IntVec2(1, 0), u2, 1) == IntVec2(-1, -1)


def test_cross_cut_round_trip(cps_base):
    rng = random.Random(7)
    for _ in range(50):
        v = IntVec2(rng.randint(-20, 20), rng.randint(-20, 20))
        for s in cps_base.singularities:
            assert cross_cut(cross_cut(v, s, 1), s, -1) == v
            assert cross_cut(cross_cut(v, s, -1), s, 1) == v


# Compass directions in clockwise order.
CLOCKWISE = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)]


def small_loop(s, r=Fraction(1, 8)):
    """Crosses the cut of s once, then returns to cut_plus the long way round."""
    i = CLOCKWISE.index(tuple(s.cut_minus))
    j = CLOCKWISE.index(tuple(s.cut_plus))
    turn = [CLOCKWISE[k % 8] for k in range(i + 1, j if j > i else j + 8)]
    start = s.position.shifted(s.cut_plus, r)
    return [start, s.glue(start)] + [s.position.shifted(d, r) for d in turn] + [start]


@pytest.mark.parametrize("name", ["u1", "u2", "u3"])
def test_loop_around_singularity_is_unipotent(cps_base, name):
    s = cps_base.singularity(name)
    path = path_from_waypoints(cps_base, small_loop(s))
    assert len(path.crossings) == 1
    m = path_monodromy(path)
    assert m == s.matrix
    assert m.det() == 1 and m.trace() == 2 and not m.is_identity()
    assert unipotent_conjugacy_index(m) == 1
    assert transport(path, s.invariant_dir) == s.invariant_dir


@pytest.mark.parametrize("name", ["u1", "u2", "u3"])
def test_contractible_loop_is_identity(cps_base, name):
    s = cps_base.singularity(name)
    loop = small_loop(s)
    there_and_back = loop + loop[::-1][1:]
    path = path_from_waypoints(cps_base, there_and_back)
    assert len(path.crossings) == 2
    assert path_monodromy(path) == Matrix2.identity()
    assert transport(path, IntVec2(3, -7)) == IntVec2(3, -7)


def test_traced_ray_retraces_backwards(cps_base):
    start = RatPoint(Fraction(1, 3), Fraction(-1, 5))
    checked = 0
    for d in [(1, 0), (1, -1), (0, 1), (-1, 1), (2, 1), (-1, -2), (1, -3), (-3, 1)]:
        d = IntVec2(*d)
        try:
            path = trace_ray(cps_base, start, d)
        except RayHitsSingularity:
            continue
        if not path.escaped or (path.crossings and path.crossings[-1].before_segment >= len(path.segments)):
            continue
        try:
            back = trace_ray(cps_base, path.segments[-1].end, -path.final_direction)
        except RayHitsSingularity:
            continue
        through = [seg for seg in back.segments if seg.param_of(start) is not None]
        assert through and through[0].direction == -d
        assert len(back.crossings) >= len(path.crossings)
        checked += 1
    assert checked >= 3
