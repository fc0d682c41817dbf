from fractions import Fraction

import pytest

from src.broken_lines.enumeration import (
    BrokenLineSearch, enumerate_broken_lines, is_generic_endpoint, n_trop, validate_endpoint,
)
from src.broken_lines.superpotential import (
    check_wallcrossings, format_series, superpotential, sweep_superpotentials, wallcross_check,
)
from src.broken_lines.transport import asymptote_by_name, candidate_classes, transport_theta
from src.core.errors import EndpointInDiscardedSector, EndpointOnWall, NotAdjacent
from src.core.formal_series import ClassExponent, FormalSeries
from src.core.lattice import IntVec2, RatPoint
from src.invariants.relative_gw import admissible_rays


def c(a, b, grade):
    return ClassExponent(IntVec2(a, b), grade)


@pytest.mark.parametrize("u, expected", [
    (RatPoint.of(-1, -2), "y + x"),
    (RatPoint.of(-1, 2), "y + x + t*x*y"),
    (RatPoint.of(1, -2), "y + x + t*x*y"),
    (RatPoint.of(2, 1), "y + x + 2*t*x*y"),
])
def test_toy_chamber_potentials(toy_diagram, u, expected):
    assert superpotential(toy_diagram, u, 2, threads=2).display(toy_diagram.base) == expected


def test_toy_two_lines_of_class_xy(toy_diagram):
    lines = [l for l in enumerate_broken_lines(toy_diagram, RatPoint.of(2, 1), 2) if l.klass == c(1, 1, 2)]
    assert len(lines) == 2
    assert sorted(l.asymptote for l in lines) == ["x", "y"]
    bends = sorted((b.point for l in lines for b in l.bends))
    assert bends == [RatPoint.of(0, -1), RatPoint.of(1, 0)]
    for line in lines:
        assert line.weight == 1
        assert line.incoming.grade == 1
        assert len(line.bends) == 1


def test_n_trop_counts(toy_diagram):
    u = RatPoint.of(2, 1)
    assert n_trop(toy_diagram, u, c(1, 1, 2)) == 2
    assert n_trop(toy_diagram, u, c(1, 0, 1)) == 1
    assert n_trop(toy_diagram, u, c(1, 1, 3)) == 0


def test_transport_theta_matches_broken_lines(toy_diagram):
    u = RatPoint.of(2, 1)
    (x,) = asymptote_by_name(toy_diagram, "x")
    (y,) = asymptote_by_name(toy_diagram, "y")
    assert transport_theta(toy_diagram, x, u, 2) == FormalSeries({c(1, 0, 1): 1, c(1, 1, 2): 1}, 2)
    assert transport_theta(toy_diagram, y, u, 2) == FormalSeries({c(0, 1, 1): 1, c(1, 1, 2): 1}, 2)
    assert set(candidate_classes(toy_diagram, u, 2)) >= {c(1, 0, 1), c(0, 1, 1), c(1, 1, 2)}


def test_endpoint_on_wall_suggests_offset(toy_diagram):
    with pytest.raises(EndpointOnWall) as info:
        validate_endpoint(toy_diagram, RatPoint.of(1, 0))
    suggested = info.value.details["suggested"]
    moved = RatPoint(Fraction(suggested[0]), Fraction(suggested[1]))
    assert moved == RatPoint(Fraction(1001, 1000), Fraction(1, 1000))
    assert is_generic_endpoint(toy_diagram, moved)


@pytest.mark.parametrize("u, expected", [
    (RatPoint.of(1, 1), RatPoint(Fraction(1001, 1000), Fraction(999, 1000))),
    (RatPoint.of(0, 0), RatPoint(Fraction(1, 1000), Fraction(-1, 1000))),
])
def test_offset_skips_candidates_on_walls(toy_diagram, u, expected):
    assert not is_generic_endpoint(toy_diagram, u)
    assert not is_generic_endpoint(toy_diagram, u.shifted((1, 1), Fraction(1, 1000)))
    with pytest.raises(EndpointOnWall) as info:
        validate_endpoint(toy_diagram, u)
    suggested = info.value.details["suggested"]
    assert RatPoint(Fraction(suggested[0]), Fraction(suggested[1])) == expected
    assert is_generic_endpoint(toy_diagram, expected)


def test_endpoint_in_discarded_sector(cps_initial):
    with pytest.raises(EndpointInDiscardedSector):
        validate_endpoint(cps_initial, RatPoint.of(1, 1))


def test_wallcross_across_scattered_ray(toy_diagram):
    (new,) = toy_diagram.scattered_rays()
    assert wallcross_check(toy_diagram, RatPoint.of(2, 1), RatPoint.of(1, 2), new.id, 2)
    assert wallcross_check(toy_diagram, RatPoint.of(-1, 2), RatPoint.of(-1, -2), None, 2)
    with pytest.raises(NotAdjacent):
        wallcross_check(toy_diagram, RatPoint.of(2, 1), RatPoint.of(-1, -2), None, 2)


def test_sweep_groups_chambers(toy_diagram):
    chambers = sweep_superpotentials(toy_diagram, Fraction(2), Fraction(1), 2, threads=1)
    displays = sorted(format_series(FormalSeries(ch.terms, 2), toy_diagram.base) for ch in chambers)
    assert displays == ["y + x", "y + x + 2*t*x*y", "y + x + t*x*y"]


def test_cps_superpotential_near_origin(cps_initial):
    w = superpotential(cps_initial, RatPoint(Fraction(1, 100), Fraction(1, 100)), 1, threads=2)
    assert w.terms == {c(-1, 0, 1): 1, c(0, -1, 1): 1, c(1, 1, 1): 1}
    assert w.display(cps_initial.base) == "x + y + x^-1*y^-1"


@pytest.mark.slow
def test_cps_minimal_terms_survive_completion(cps_d3):
    w = superpotential(cps_d3, RatPoint(Fraction(1, 100), Fraction(1, 100)), 3)
    assert w.minimal_grade_terms() == {c(-1, 0, 1): 1, c(0, -1, 1): 1, c(1, 1, 1): 1}


def test_search_reports_classes_met_at_bends(toy_diagram):
    lines, met = BrokenLineSearch(toy_diagram, 2, threads=1)._for_class(RatPoint.of(2, 1), c(1, 1, 2))
    assert len(lines) == 2
    assert met == {c(1, 0, 1), c(0, 1, 1)}


def test_sampled_wallcrossings_on_toy(toy_diagram):
    report = check_wallcrossings(toy_diagram, 10, 2, threads=1)
    assert report.checked == 10
    assert report.failures == []


@pytest.mark.slow
def test_sampled_wallcrossings_on_cps(cps_d3):
    report = check_wallcrossings(cps_d3, 20, 3)
    assert report.checked == 20
    assert report.failures == []


def test_wallcross_across_initial_cps_ray(cps_initial):
    (ray,) = [r for r in cps_initial.rays if r.provenance.source == "u1" and r.direction == IntVec2(1, -1)]
    q = RatPoint(Fraction(3, 4), Fraction(1, 4))
    delta = Fraction(1, 1000)
    assert wallcross_check(cps_initial, q.shifted((1, 1), delta), q.shifted((1, 1), -delta), ray.id, 1)


@pytest.mark.slow
def test_wallcross_across_three_torsion_ray(cps_d3):
    adm = next(a for a in admissible_rays(cps_d3) if a.torsion == 3)
    seg = cps_d3.ray(adm.ray_id).support.segments[-1]
    normal = (-seg.direction.b, seg.direction.a)
    delta = Fraction(1, 1000)
    checked = 0
    for k in (1, 2, 3, 5, 7):
        q = seg.start.shifted(seg.direction, seg.length * Fraction(k, 8))
        try:
            ok = wallcross_check(cps_d3, q.shifted(normal, delta), q.shifted(normal, -delta), adm.ray_id, 3)
        except (NotAdjacent, EndpointOnWall):
            continue
        assert ok
        checked += 1
    assert checked >= 1
