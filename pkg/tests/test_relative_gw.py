from fractions import Fraction

import pytest

from src.core.errors import NotStabilized
from src.core.formal_series import FormalSeries
from src.core.lattice import IntVec2
from src.invariants.relative_gw import (
    admissible_rays, bps_counts, f_out, per_ray_breakdown, relative_gw, torsion_label,
)


def test_flat_toy_has_no_admissible_rays(toy_diagram):
    assert admissible_rays(toy_diagram) == []
    assert f_out(toy_diagram) == FormalSeries.one(2)
    assert relative_gw(toy_diagram, 1) == 0


@pytest.mark.slow
def test_degree_one_from_order_three(cps_d3):
    rays = admissible_rays(cps_d3)
    three = [a for a in rays if a.torsion == 3]
    assert len(three) == 3
    for a in three:
        assert a.exit_direction in (IntVec2(1, 0), IntVec2(0, 1), IntVec2(-1, -1))
        assert torsion_label(cps_d3, a.ray_id) == "3-torsion"
    assert relative_gw(cps_d3, 1) == 9

    row = bps_counts(cps_d3, 1).row(1)
    assert (row.value, row.bps, row.integral) == (9, 9, True)
    assert sorted(c.bps for c in per_ray_breakdown(cps_d3, 1)) == [3, 3, 3]


@pytest.mark.slow
def test_degree_two_from_order_six(cps_d6):
    assert relative_gw(cps_d6, 1) == 9
    assert relative_gw(cps_d6, 2) == Fraction(135, 4)
    table = bps_counts(cps_d6, 2)
    assert table.row(2).bps == -36
    assert table.row(2).integral
    assert len([a for a in admissible_rays(cps_d6) if a.torsion == 6]) == 3


@pytest.mark.slow
def test_stabilisation_check(cps_d3, cps_d6):
    assert relative_gw(cps_d3, 1, check=cps_d6) == 9
    with pytest.raises(NotStabilized):
        relative_gw(cps_d3, 2, check=cps_d6)
