import json

import pytest
from lxml import etree

from src.main import main
from src.utils.serialization import load_diagram


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def toy_file(tmp_path):
    path = str(tmp_path / "toy.json")
    assert main(["scatter", "--base", "toy-two-wall", "--order", "2", "-o", path, "--threads", "2"]) == 0
    return path


def error_payload(err: str) -> dict:
    return json.loads([line for line in err.splitlines() if line.startswith('{"error"')][-1])


def test_scatter_writes_three_ray_toy(toy_file):
    diagram = load_diagram(toy_file)
    assert len(diagram.rays) == 3
    assert diagram.order == 2


def test_scatter_output_is_byte_identical(tmp_path, toy_file):
    other = str(tmp_path / "toy-reversed.json")
    assert main(["scatter", "--base", "toy-two-wall", "--order", "2", "-o", other, "--threads", "1",
                 "--reverse-order", "--no-cache"]) == 0
    with open(toy_file, "rb") as a, open(other, "rb") as b:
        assert a.read() == b.read()


def test_order_zero_is_a_usage_error(capsys):
    assert main(["scatter", "--order", "0"]) == 2
    assert error_payload(capsys.readouterr().err)["error"] == "ConfigError"


def test_potential_prints_chamber_potential(toy_file, capsys):
    assert main(["potential", toy_file, "--at", "2,1"]) == 0
    assert "W(2,1) = y + x + 2*t*x*y" in capsys.readouterr().out


def test_potential_on_wall(tmp_path, toy_file, capsys):
    assert main(["potential", toy_file, "--at", "1,0"]) == 1
    payload = error_payload(capsys.readouterr().err)
    assert payload["error"] == "EndpointOnWall"
    assert payload["details"]["suggested"] == ["1001/1000", "1/1000"]

    out = str(tmp_path / "w.json")
    assert main(["potential", toy_file, "--at", "1,0", "--offset", "-o", out]) == 0
    with open(out, encoding="utf-8") as f:
        written = json.load(f)
    assert written["offset"] == ["1/1000", "1/1000"]
    assert written["point"] == ["1001/1000", "1/1000"]
    assert written["display"] == "y + x + 2*t*x*y"


def test_potential_on_crossing_walls(toy_file, capsys):
    assert main(["potential", toy_file, "--at", "1,1"]) == 1
    payload = error_payload(capsys.readouterr().err)
    assert payload["error"] == "EndpointOnWall"
    assert payload["details"]["suggested"] == ["1001/1000", "999/1000"]
    assert main(["potential", toy_file, "--at", "1,1", "--offset"]) == 0
    assert "W(1001/1000,999/1000) = y + x + 2*t*x*y" in capsys.readouterr().out


def test_potential_needs_an_endpoint(toy_file, capsys):
    assert main(["potential", toy_file]) == 2


def test_verify_reports_no_defects(toy_file, capsys):
    assert main(["verify", toy_file, "--samples", "0"]) == 0
    assert "0 defects" in capsys.readouterr().out


def test_relgw_on_flat_toy(toy_file, capsys):
    assert main(["relgw", toy_file]) == 0
    assert capsys.readouterr().out.strip() == "1, 0, 0"
    assert main(["relgw", toy_file, "--csv"]) == 0
    assert capsys.readouterr().out.splitlines() == ["d,N,BPS", "1,0,0"]


def test_plot_writes_svg(tmp_path, toy_file):
    svg = str(tmp_path / "toy.svg")
    assert main(["plot", toy_file, "-o", svg, "--at", "2,1"]) == 0
    root = etree.parse(svg).getroot()
    assert root.tag.endswith("svg")
    assert root.find("{http://www.w3.org/2000/svg}g[@id='broken-lines']") is not None


def test_missing_input_file(capsys):
    assert main(["verify", "nope.json"]) == 1
    assert error_payload(capsys.readouterr().err)["error"] == "CorruptInput"


@pytest.mark.slow
def test_relgw_degree_one_row(tmp_path, capsys):
    d3 = str(tmp_path / "d3.json")
    assert main(["scatter", "--base", "cps-p2", "--order", "3", "-o", d3]) == 0
    capsys.readouterr()
    assert main(["relgw", "--order", "3", d3]) == 0
    assert capsys.readouterr().out.splitlines() == ["1, 9, 9"]
    assert main(["verify", d3, "--samples", "0"]) == 0
    assert "0 defects" in capsys.readouterr().out
