import json
import os
from fractions import Fraction

import pytest
from lxml import etree

from src.core.cache import DiagramCache
from src.core.errors import ConfigError, CorruptInput
from src.core.lattice import RatPoint
from src.utils.rational_utils import parse_degrees, parse_point, parse_rational
from src.utils.serialization import (
    base_from_payload, base_to_payload, diagram_from_payload, diagram_to_payload, load_diagram, read_json,
    save_diagram,
)
from src.utils.svg_plot import SVG_NS, ray_color, render_diagram


def test_parse_rational_is_exact():
    assert parse_rational("1/100") == Fraction(1, 100)
    assert parse_rational(" -7 / 4 ") * 4 == -7
    with pytest.raises(ConfigError):
        parse_rational("0.5")


def test_parse_point_and_degrees():
    assert parse_point("1/2,-3") == RatPoint.of("1/2", -3)
    assert parse_degrees("1-3") == [1, 2, 3]
    assert parse_degrees("2,1") == [1, 2]
    with pytest.raises(ConfigError):
        parse_degrees("0")
    with pytest.raises(ConfigError):
        parse_point("1,2,3")


def test_base_round_trip(cps_base):
    payload = base_to_payload(cps_base)
    assert base_from_payload(json.loads(json.dumps(payload))) == cps_base


@pytest.mark.parametrize("fixture", ["toy_diagram", "cps_initial"])
def test_diagram_round_trip(request, tmp_path, fixture):
    diagram = request.getfixturevalue(fixture)
    path = tmp_path / "diagram.json"
    save_diagram(diagram, str(path))
    first = path.read_bytes()
    again = load_diagram(str(path))
    save_diagram(again, str(path))
    assert path.read_bytes() == first
    assert len(again.rays) == len(diagram.rays)
    assert diagram_to_payload(again) == diagram_to_payload(diagram)


def test_corrupt_inputs(tmp_path, toy_diagram):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(CorruptInput):
        read_json(str(bad))
    with pytest.raises(CorruptInput):
        read_json(str(tmp_path / "missing.json"))

    payload = diagram_to_payload(toy_diagram)
    with pytest.raises(CorruptInput):
        diagram_from_payload(dict(payload, schema=99))
    with pytest.raises(CorruptInput):
        diagram_from_payload({"schema": payload["schema"], "rays": []})
    broken = json.loads(json.dumps(payload))
    del broken["rays"][0]["polyline"]
    with pytest.raises(CorruptInput):
        diagram_from_payload(broken)


def test_cache_stores_and_drops_corrupt_entries(tmp_path, toy_diagram):
    cache = DiagramCache(str(tmp_path))
    path = cache.store(toy_diagram)
    loaded = cache.load("toy-two-wall", toy_diagram.radius, toy_diagram.order)
    assert diagram_to_payload(loaded) == diagram_to_payload(toy_diagram)
    assert cache.load("toy-two-wall", toy_diagram.radius, 5) is None

    with open(path, "w", encoding="utf-8") as f:
        f.write("garbage")
    assert cache.load("toy-two-wall", toy_diagram.radius, toy_diagram.order) is None
    assert not os.path.exists(path)


def test_svg_is_well_formed(cps_initial):
    root = etree.fromstring(render_diagram(cps_initial))
    assert root.tag == f"{{{SVG_NS}}}svg"
    circles = root.findall(f".//{{{SVG_NS}}}circle")
    assert len(circles) == 3
    rays = root.find(f"{{{SVG_NS}}}g[@id='rays']")
    assert len(rays) == sum(len(r.support.segments) for r in cps_initial.rays)
    assert {line.get("stroke") for line in rays} == {ray_color(1)}


def test_ray_colors_follow_grade():
    assert ray_color(1) != ray_color(2)
    assert ray_color(50) == ray_color(51)
