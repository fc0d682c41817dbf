# ===== IMPORTS & DEPENDENCIES =====
import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.config import DEFAULT_THREADS
from src.core.affine_base import AffineBase, trace_ray
from src.core.formal_series import ClassExponent, FormalSeries, WallFunction
from src.core.lattice import IntVec2, RatPoint
from src.scattering.diagram import Provenance, Ray, ScatteringDiagram, initial_diagram
from src.scattering.local_geometry import CollisionIndex, Germ, point_key
from src.scattering.loops import defect_rays, read_defect, singular_point_consistent, theta_loop

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class Insertion:
    """Log terms to add along `direction` at `point`, found while processing one order."""
    point: RatPoint
    direction: IntVec2
    terms: Tuple[Tuple[int, int, Fraction], ...]
    parents: Tuple[int, ...]

    def sort_key(self):
        return (point_key(self.point), self.direction.a, self.direction.b)


@dataclass
class Defect:
    """
    A point where the loop product is not the identity.

    Attributes:
        point (RatPoint): Canonical point of the defect.
        x_defect (Optional[FormalSeries]): theta(x) - x, None for a singular point.
        y_defect (Optional[FormalSeries]): theta(y) - y, None for a singular point.
        singularity (Optional[str]): Set when the failing loop encloses a focus-focus point.
    """
    point: RatPoint
    x_defect: Optional[FormalSeries] = None
    y_defect: Optional[FormalSeries] = None
    singularity: Optional[str] = None

    @property
    def min_grade(self) -> Optional[int]:
        grades = [s.min_grade(skip_unit=False) for s in (self.x_defect, self.y_defect) if s is not None]
        grades = [g for g in grades if g is not None]
        return min(grades) if grades else None

# ===== CORE BUSINESS LOGIC =====

def _min_pair_grade(germs: List[Germ], rays: Dict[int, Ray]) -> Optional[int]:
    """Smallest grade at which two non-parallel walls through the point can interact."""
    best: Optional[int] = None
    for i, g1 in enumerate(germs):
        for g2 in germs[i + 1:]:
            if g1.klass.pairing(g2.klass) == 0:
                continue
            total = rays[g1.ray_id].min_grade + rays[g2.ray_id].min_grade
            if best is None or total < best:
                best = total
    return best


class ScatteringEngine:
    """
    Order-by-order completion of a scattering diagram. Within one order every
    collision point is independent, so loop products run on a thread pool; the
    results are merged in a fixed (point, direction) order so ray ids never depend
    on scheduling.
    """

    def __init__(self, threads: int = DEFAULT_THREADS, reverse: bool = False):
        self.threads = max(1, threads)
        self.reverse = reverse

    def _solve_point(self, diagram: ScatteringDiagram, q: RatPoint, k: int, germs: List[Germ]) -> List[Insertion]:
        loop = theta_loop(diagram, q, k, germs)
        defect = read_defect(loop, k)
        if not defect:
            return []
        parents = tuple(sorted({g.ray_id for g in germs if not g.born_here}))
        return [Insertion(q, w, tuple(terms), parents) for w, terms in defect_rays(defect).items()]

    async def _run_points(self, fn, points: List[RatPoint]) -> List:
        # Fraction arithmetic holds the GIL: the pool keeps results in point order, it does not add speed.
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            tasks = [loop.run_in_executor(pool, fn, q) for q in points]
            results = await asyncio.gather(*tasks, return_exceptions=True)
        failures = [(q, r) for q, r in zip(points, results) if isinstance(r, BaseException)]
        if failures:
            q, error = min(failures, key=lambda item: point_key(item[0]))
            logger.error(f"❌ [{self.__class__.__name__}] Loop product at {q} failed: {error}", exc_info=error)
            raise error
        return results

    def _merge(self, diagram: ScatteringDiagram, index: CollisionIndex, insertions: List[Insertion], k: int,
               born: Dict[Tuple[RatPoint, IntVec2], int]) -> Tuple[int, int]:
        N = diagram.order
        rays = diagram.by_id()
        created, updated = 0, 0
        for ins in sorted(insertions, key=lambda i: i.sort_key()):
            log_series = FormalSeries({ClassExponent(ins.direction * j, g): c for j, g, c in ins.terms}, N)
            existing = born.get((ins.point, ins.direction))
            if existing is not None:
                ray = rays[existing]
                ray.wall = WallFunction(ray.wall.series * log_series.exp(), ray.direction)
                updated += 1
                continue
            ray = Ray(
                id=max(rays) + 1 if rays else 0,
                origin=ins.point,
                direction=ins.direction,
                wall=WallFunction(log_series.exp(), ins.direction),
                support=trace_ray(diagram.base, ins.point, ins.direction),
                provenance=Provenance("scattered", point=ins.point, parents=ins.parents, order=k),
            )
            diagram.rays.append(ray)
            rays[ray.id] = ray
            born[(ins.point, ins.direction)] = ray.id
            index.add_ray(ray)
            created += 1
        return created, updated

    async def complete(self, diagram: ScatteringDiagram, N: int) -> ScatteringDiagram:
        """Adds rays until every loop product is the identity mod t^(N+1). The input is not modified."""
        logger.info(f"🚀🚀🚀 [{self.__class__.__name__}] Completing '{diagram.base.name}' to order {N} "
                    f"with {len(diagram.rays)} rays on {self.threads} threads")
        work = ScatteringDiagram(
            diagram.base,
            [replace(r, wall=WallFunction(r.wall.series.with_trunc(N), r.direction)) for r in diagram.rays],
            N,
        )
        index = CollisionIndex(work.base)
        for ray in work.rays:
            index.add_ray(ray)
        born = {(r.origin, r.direction): r.id for r in work.rays if not r.provenance.is_initial}

        for k in range(2, N + 1):
            rays = work.by_id()
            active: List[RatPoint] = []
            for q in index.collision_points():
                grade = _min_pair_grade(index.points[q], rays)
                if grade is not None and grade <= k:
                    active.append(q)
            if self.reverse:
                active.reverse()
            logger.info(f"--- Order {k}: {len(active)} active collision points ---")
            results = await self._run_points(
                lambda q, k=k: self._solve_point(work, q, k, list(index.points[q])), active)
            insertions = [ins for batch in results for ins in batch]
            created, updated = self._merge(work, index, insertions, k, born)
            logger.info(f"✅ Order {k}: {created} new rays, {updated} updated, {len(work.rays)} in total")

        for s in work.base.singularities:
            if not singular_point_consistent(work, s):
                logger.warning(f"⚠️ [{self.__class__.__name__}] Loop around singularity {s.name} is not the identity")
        logger.info(f"🏁🏁🏁 [{self.__class__.__name__}] Diagram complete: {len(work.rays)} rays at order {N}")
        return work

    async def find_defects(self, diagram: ScatteringDiagram, N: Optional[int] = None) -> List[Defect]:
        N = diagram.order if N is None else N
        index = CollisionIndex(diagram.base)
        for ray in diagram.rays:
            index.add_ray(ray)

        def check(q: RatPoint) -> Optional[Defect]:
            dx, dy = theta_loop(diagram, q, N, list(index.points[q])).basis_defects()
            if dx.is_zero() and dy.is_zero():
                return None
            return Defect(q, dx, dy)

        points = index.collision_points()
        results = await self._run_points(check, points)
        defects = [d for d in results if d is not None]
        for s in diagram.base.singularities:
            if not singular_point_consistent(diagram, s):
                defects.append(Defect(s.position, singularity=s.name))
        if defects:
            logger.warning(f"⚠️ [{self.__class__.__name__}] {len(defects)} defects among {len(points)} collision points")
        else:
            logger.info(f"✅ [{self.__class__.__name__}] All {len(points)} collision points are consistent mod t^{N + 1}")
        return defects

# ===== UTILITY FUNCTIONS =====

def complete(diagram: ScatteringDiagram, N: int, threads: int = DEFAULT_THREADS, reverse: bool = False) -> ScatteringDiagram:
    return asyncio.run(ScatteringEngine(threads, reverse).complete(diagram, N))


def scatter(base: AffineBase, N: int, threads: int = DEFAULT_THREADS, reverse: bool = False) -> ScatteringDiagram:
    """Initial diagram of the base completed to order N."""
    return complete(initial_diagram(base, N), N, threads, reverse)


def consistency_check(diagram: ScatteringDiagram, N: Optional[int] = None, threads: int = DEFAULT_THREADS) -> List[Defect]:
    return asyncio.run(ScatteringEngine(threads).find_defects(diagram, N))
