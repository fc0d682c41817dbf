from fractions import Fraction

import pytest

from src.core.errors import PointIsSingular, RadiusExceeded
from src.core.formal_series import UNIT, ClassExponent, FormalSeries, WallFunction
from src.core.lattice import IntVec2, RatPoint
from src.scattering.completion import complete, consistency_check
from src.scattering.diagram import initial_diagram, type_ii_rays
from src.scattering.loops import scatter_locally, singular_point_consistent, theta_loop
from src.utils.serialization import diagram_to_payload

ORIGIN = RatPoint.of(0, 0)


def test_toy_completion_adds_one_ray(toy_diagram):
    assert len(toy_diagram.rays) == 3
    (new,) = toy_diagram.scattered_rays()
    assert new.origin == ORIGIN
    assert new.direction == IntVec2(1, 1)
    assert new.provenance.order == 2
    assert new.wall.series == FormalSeries({UNIT: 1, ClassExponent(IntVec2(1, 1), 2): 1}, 2)


def test_toy_loop_is_identity_after_completion(toy_initial, toy_diagram):
    assert theta_loop(toy_diagram, ORIGIN, 2).is_identity()
    assert not theta_loop(toy_initial, ORIGIN, 2).is_identity()
    assert consistency_check(toy_diagram) == []
    assert len(consistency_check(toy_initial)) == 1


def test_toy_order_three_wall(toy_initial):
    d3 = complete(toy_initial, 3)
    (new,) = d3.scattered_rays()
    assert new.wall.series == FormalSeries({UNIT: 1, ClassExponent(IntVec2(1, 1), 2): 1}, 3)
    assert consistency_check(d3) == []


def test_scatter_locally_matches_completion():
    out = scatter_locally([(IntVec2(1, 0), WallFunction.binomial(IntVec2(1, 0), 1, 2)),
                           (IntVec2(0, 1), WallFunction.binomial(IntVec2(0, 1), 1, 2))], 2)
    assert list(out) == [IntVec2(1, 1)]
    assert out[IntVec2(1, 1)].coefficient(ClassExponent(IntVec2(1, 1), 2)) == 1


def test_completion_is_deterministic(toy_initial, toy_diagram):
    single = complete(toy_initial, 2, threads=1)
    reversed_ = complete(toy_initial, 2, threads=4, reverse=True)
    assert diagram_to_payload(single) == diagram_to_payload(toy_diagram)
    assert diagram_to_payload(reversed_) == diagram_to_payload(toy_diagram)


def test_theta_loop_rejects_bad_points(cps_initial):
    with pytest.raises(PointIsSingular):
        theta_loop(cps_initial, RatPoint(Fraction(1, 2), Fraction(1, 2)), 1)
    with pytest.raises(RadiusExceeded):
        theta_loop(cps_initial, RatPoint.of(9, 0), 1)


def test_cps_initial_rays(cps_initial):
    assert len(cps_initial.rays) == 6
    assert {r.provenance.source for r in cps_initial.rays} == {"u1", "u2", "u3"}
    for s in cps_initial.base.singularities:
        assert singular_point_consistent(cps_initial, s)


def test_type_ii_rays_carry_five_classes(toy_base):
    rays = type_ii_rays(toy_base, RatPoint.of(1, 1), IntVec2(1, 0), IntVec2(0, 1), 1, 2)
    assert [r.direction for r in rays] == [IntVec2(-1, 0), IntVec2(0, 1), IntVec2(1, 1), IntVec2(1, 0), IntVec2(0, -1)]


@pytest.mark.slow
def test_cps_order_three_is_consistent(cps_d3):
    assert consistency_check(cps_d3) == []
    assert len(cps_d3.rays) > 6
    for ray in cps_d3.scattered_rays():
        assert ray.provenance.order >= 2
        assert ray.wall.series.min_grade() >= 2


def test_completion_is_idempotent(toy_diagram):
    assert diagram_to_payload(complete(toy_diagram, 2)) == diagram_to_payload(toy_diagram)


@pytest.mark.slow
def test_cps_completion_is_deterministic_and_idempotent(cps_base, cps_d3):
    again = complete(initial_diagram(cps_base, 3), 3, threads=1, reverse=True)
    assert diagram_to_payload(again) == diagram_to_payload(cps_d3)
    assert diagram_to_payload(complete(cps_d3, 3)) == diagram_to_payload(cps_d3)
