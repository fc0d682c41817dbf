# ===== IMPORTS & DEPENDENCIES =====
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.core.affine_base import AffineBase, TransportPath, invariant_direction, trace_ray
from src.core.errors import UnsupportedSingularityType
from src.core.formal_series import WallFunction
from src.core.lattice import IntVec2, Matrix2, RatPoint

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

TYPE_II_MONODROMY = Matrix2(0, 1, -1, 1)

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class Provenance:
    """
    Where a ray comes from.

    Attributes:
        kind (str): 'initial' for slab rays of a singularity or initial wall, 'scattered' otherwise.
        source (Optional[str]): Singularity or initial-wall name of an initial ray.
        sign (int): +1 / -1 for the two rays of a focus-focus point along +/- its invariant direction.
        point (Optional[RatPoint]): Canonical birth point of a scattered ray.
        parents (Tuple[int, ...]): Ids of the rays passing through the birth point when it was created.
        order (int): Grade at which the ray first appeared.
    """
    kind: str
    source: Optional[str] = None
    sign: int = 0
    point: Optional[RatPoint] = None
    parents: Tuple[int, ...] = ()
    order: int = 1

    @property
    def is_initial(self) -> bool:
        return self.kind == "initial"


@dataclass
class Ray:
    """
    A wall of the diagram. `direction` is the primitive class at the origin and the
    wall function is written in multiples of it; on later segments (after cut jumps)
    the same coefficients sit on multiples of that segment's direction.
    """
    id: int
    origin: RatPoint
    direction: IntVec2
    wall: WallFunction
    support: TransportPath
    provenance: Provenance

    def wall_on_segment(self, index: int) -> WallFunction:
        return self.wall.reoriented(self.support.segments[index].direction)

    @property
    def exit_direction(self) -> Optional[IntVec2]:
        return self.support.final_direction

    @property
    def min_grade(self) -> int:
        grade = self.wall.series.min_grade()
        return grade if grade is not None else 0


@dataclass
class ScatteringDiagram:
    base: AffineBase
    rays: List[Ray] = field(default_factory=list)
    order: int = 1

    @property
    def radius(self) -> int:
        return self.base.radius

    def ray(self, ray_id: int) -> Ray:
        for r in self.rays:
            if r.id == ray_id:
                return r
        raise KeyError(ray_id)

    def scattered_rays(self) -> List[Ray]:
        return [r for r in self.rays if not r.provenance.is_initial]

    def by_id(self) -> Dict[int, Ray]:
        return {r.id: r for r in self.rays}

# ===== CORE BUSINESS LOGIC =====

def initial_diagram(base: AffineBase, N: int) -> ScatteringDiagram:
    """Two slab rays 1 + t z^(+-v) per focus-focus point, plus the base's explicit initial walls."""
    rays: List[Ray] = []
    for s in base.singularities:
        if not s.is_type_a1():
            raise UnsupportedSingularityType(
                f"singularity {s.name} has monodromy {s.matrix} (trace {s.matrix.trace()}); only focus-focus points are scattered",
                {"singularity": s.name, "trace": s.matrix.trace()})
        v = invariant_direction(s)
        for sign in (1, -1):
            direction = v * sign
            rays.append(Ray(
                id=len(rays),
                origin=s.position,
                direction=direction,
                wall=WallFunction.binomial(direction, 1, N),
                support=trace_ray(base, s.position, direction),
                provenance=Provenance("initial", s.name, sign),
            ))
    for w in base.initial_walls:
        rays.append(Ray(
            id=len(rays),
            origin=w.origin,
            direction=w.direction,
            wall=WallFunction.binomial(w.direction, w.grade, N, w.multiple),
            support=trace_ray(base, w.origin, w.direction),
            provenance=Provenance("initial", w.name, 1),
        ))
    logger.info(f"✅ [initial_diagram] {len(rays)} initial rays on base '{base.name}' at order {N}")
    return ScatteringDiagram(base, rays, N)


def type_ii_rays(base: AffineBase, position: RatPoint, gamma1: IntVec2, gamma2: IntVec2,
                 grade: int, N: int, first_id: int = 0) -> List[Ray]:
    """
    The five slab rays of a singularity with monodromy [[0, 1], [-1, 1]]: classes
    -g1, g2, g1 + g2, g1, -g2, each carrying 1 + t^grade z^gamma.
    """
    classes = [-gamma1, gamma2, gamma1 + gamma2, gamma1, -gamma2]
    rays = []
    for i, gamma in enumerate(classes):
        direction = gamma.primitive()
        rays.append(Ray(
            id=first_id + i,
            origin=position,
            direction=direction,
            wall=WallFunction.binomial(direction, grade, N, gamma.content()),
            support=trace_ray(base, position, direction),
            provenance=Provenance("initial", f"type-ii-{i}", 1, order=grade),
        ))
    return rays
