# ===== IMPORTS & DEPENDENCIES =====
import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List

from src.config import DIAGRAM_SCHEMA_VERSION
from src.core.affine_base import (
    AffineBase, Asymptote, CutCrossing, InitialWall, Region, Segment, Singularity, TransportPath,
    rational_direction,
)
from src.core.errors import CorruptInput
from src.core.formal_series import ClassExponent, FormalSeries, WallFunction
from src.core.lattice import Matrix2, format_rat
from src.models.payloads import (
    BasePayload, BrokenLinePayload, DiagramPayload, RayPayload, RelGWRowPayload, SeriesTermPayload,
    SuperpotentialPayload,
)
from src.broken_lines.superpotential import format_series
from src.scattering.diagram import Provenance, Ray, ScatteringDiagram
from src.utils.rational_utils import point_from_strings, point_to_strings, vec_from_list, vec_to_list

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== UTILITY FUNCTIONS =====

def series_to_payload(series: FormalSeries) -> List[SeriesTermPayload]:
    return [{"m": vec_to_list(e.m), "grade": e.grade, "coeff": format_rat(c)} for e, c in series]


def series_from_payload(terms: List[Dict[str, Any]], trunc: int) -> FormalSeries:
    return FormalSeries({ClassExponent(vec_from_list(t["m"]), int(t["grade"])): Fraction(t["coeff"]) for t in terms}, trunc)


def base_to_payload(base: AffineBase) -> BasePayload:
    return {
        "name": base.name,
        "radius": base.radius,
        "singularities": [{
            "name": s.name,
            "position": point_to_strings(s.position),
            "cut_plus": vec_to_list(s.cut_plus),
            "cut_minus": vec_to_list(s.cut_minus),
            "matrix": s.matrix.rows(),
            "invariant_dir": vec_to_list(s.invariant_dir) if s.invariant_dir else None,
        } for s in base.singularities],
        "asymptotes": [{"name": a.name, "m_out": vec_to_list(a.m_out), "lo": format_rat(a.lo), "hi": format_rat(a.hi)}
                       for a in base.asymptotes],
        "regions": [{"name": r.name, "opening": r.opening, "closing": r.closing,
                     "scale_vector": vec_to_list(r.scale_vector), "centre": point_to_strings(r.centre)}
                    for r in base.regions],
        "initial_walls": [{"name": w.name, "origin": point_to_strings(w.origin), "direction": vec_to_list(w.direction),
                           "grade": w.grade, "multiple": w.multiple} for w in base.initial_walls],
        "variables": [{"name": n, "m": vec_to_list(m)} for n, m in base.variables],
    }


def base_from_payload(data: Dict[str, Any]) -> AffineBase:
    try:
        return AffineBase(
            name=data["name"],
            singularities=tuple(Singularity(
                s["name"], point_from_strings(s["position"]), vec_from_list(s["cut_plus"]),
                vec_from_list(s["cut_minus"]), Matrix2.from_rows(s["matrix"]),
                vec_from_list(s["invariant_dir"]) if s.get("invariant_dir") else None,
            ) for s in data.get("singularities", [])),
            asymptotes=tuple(Asymptote(a["name"], vec_from_list(a["m_out"]), Fraction(a["lo"]), Fraction(a["hi"]))
                             for a in data.get("asymptotes", [])),
            regions=tuple(Region(r["name"], r["opening"], r["closing"], vec_from_list(r["scale_vector"]),
                                 point_from_strings(r.get("centre", ["0", "0"])))
                          for r in data.get("regions", [])),
            initial_walls=tuple(InitialWall(w["name"], point_from_strings(w["origin"]), vec_from_list(w["direction"]),
                                            int(w.get("grade", 1)), int(w.get("multiple", 1)))
                                for w in data.get("initial_walls", [])),
            variables=tuple((v["name"], vec_from_list(v["m"])) for v in data.get("variables", [])),
            radius=int(data.get("radius", 8)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptInput(f"base description is malformed: {e}", {"field": str(e)})

# ===== CORE BUSINESS LOGIC =====

def ray_to_payload(ray: Ray) -> RayPayload:
    p = ray.provenance
    return {
        "id": ray.id,
        "origin": point_to_strings(ray.origin),
        "direction": vec_to_list(ray.direction),
        "polyline": [[point_to_strings(s.start), point_to_strings(s.end)] for s in ray.support.segments],
        "crossings": [{"singularity": c.singularity.name, "orientation": c.orientation,
                       "point": point_to_strings(c.point), "before_segment": c.before_segment}
                      for c in ray.support.crossings],
        "escaped": ray.support.escaped,
        "final_direction": vec_to_list(ray.support.final_direction) if ray.support.final_direction else None,
        "wall": series_to_payload(ray.wall.series),
        "provenance": {
            "kind": p.kind, "source": p.source, "sign": p.sign,
            "point": point_to_strings(p.point) if p.point else None,
            "parents": list(p.parents), "order": p.order,
        },
    }


def ray_from_payload(data: Dict[str, Any], base: AffineBase, order: int) -> Ray:
    segments = []
    for start, end in data["polyline"]:
        a, b = point_from_strings(start), point_from_strings(end)
        direction, length = rational_direction(b.minus(a))
        segments.append(Segment(a, b, direction, length))
    crossings = [CutCrossing(base.singularity(c["singularity"]), int(c["orientation"]),
                             point_from_strings(c["point"]), int(c["before_segment"])) for c in data.get("crossings", [])]
    final = data.get("final_direction")
    support = TransportPath(segments, crossings, vec_from_list(final) if final else None, bool(data.get("escaped")))
    direction = vec_from_list(data["direction"])
    p = data.get("provenance", {})
    return Ray(
        id=int(data["id"]),
        origin=point_from_strings(data["origin"]),
        direction=direction,
        wall=WallFunction(series_from_payload(data["wall"], order), direction),
        support=support,
        provenance=Provenance(p.get("kind", "initial"), p.get("source"), int(p.get("sign", 0)),
                              point_from_strings(p["point"]) if p.get("point") else None,
                              tuple(p.get("parents", [])), int(p.get("order", 1))),
    )


def diagram_to_payload(diagram: ScatteringDiagram) -> DiagramPayload:
    return {
        "schema": DIAGRAM_SCHEMA_VERSION,
        "order": diagram.order,
        "base": base_to_payload(diagram.base),
        "rays": [ray_to_payload(r) for r in sorted(diagram.rays, key=lambda r: r.id)],
    }


def diagram_from_payload(data: Dict[str, Any]) -> ScatteringDiagram:
    if not isinstance(data, dict) or "rays" not in data or "base" not in data:
        raise CorruptInput("diagram file needs 'base' and 'rays'")
    if data.get("schema") != DIAGRAM_SCHEMA_VERSION:
        raise CorruptInput(f"unsupported diagram schema {data.get('schema')}", {"schema": data.get("schema")})
    base = base_from_payload(data["base"])
    order = int(data.get("order", 1))
    try:
        rays = [ray_from_payload(r, base, order) for r in data["rays"]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise CorruptInput(f"ray entry is malformed: {e}", {"field": str(e)})
    return ScatteringDiagram(base, rays, order)


def broken_line_to_payload(line) -> BrokenLinePayload:
    return {
        "asymptote": line.asymptote,
        "klass": {"m": vec_to_list(line.klass.m), "grade": line.klass.grade, "coeff": format_rat(line.weight)},
        "weight": format_rat(line.weight),
        "segments": [{"start": point_to_strings(s.start), "end": point_to_strings(s.end),
                      "m": vec_to_list(s.klass.m), "grade": s.klass.grade, "coeff": format_rat(s.coeff)}
                     for s in line.segments],
        "bends": [{"point": point_to_strings(b.point), "rays": list(b.ray_ids),
                   "term": {"m": vec_to_list(b.term.m), "grade": b.term.grade}, "coeff": format_rat(b.coeff)}
                  for b in line.bends],
    }


def relgw_row_to_payload(row) -> RelGWRowPayload:
    return {
        "degree": row.degree,
        "value": format_rat(row.value),
        "bps": format_rat(row.bps),
        "integral": row.integral,
        "contributions": [{"ray": c.ray_id, "torsion": c.torsion, "omega_tilde": format_rat(c.omega_tilde),
                           "bps": format_rat(c.bps) if c.bps is not None else None} for c in row.contributions],
    }


def superpotential_to_payload(w, base: AffineBase, offset=None) -> SuperpotentialPayload:
    return {
        "point": point_to_strings(w.point),
        "offset": [format_rat(offset[0]), format_rat(offset[1])] if offset else None,
        "order": w.order,
        "display": format_series(w.as_series(), base),
        "terms": series_to_payload(w.as_series()),
        "lines": [broken_line_to_payload(line) for line in w.lines],
    }


def write_json(payload: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=4)
        f.write("\n")
    logger.info(f"💾 Saved {path}")


def read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise CorruptInput(f"input file {path} does not exist", {"path": path})
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptInput(f"input file {path} is not valid JSON: {e}", {"path": path})


def load_diagram(path: str) -> ScatteringDiagram:
    diagram = diagram_from_payload(read_json(path))
    logger.info(f"✅ Loaded diagram with {len(diagram.rays)} rays at order {diagram.order} from {path}")
    return diagram


def save_diagram(diagram: ScatteringDiagram, path: str) -> None:
    write_json(diagram_to_payload(diagram), path)
