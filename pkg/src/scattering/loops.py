# ===== IMPORTS & DEPENDENCIES =====
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Rational, cancel, symbols

from src.core.errors import CollisionOnCut, InconsistentDiagram, PointIsSingular, RadiusExceeded
from src.core.formal_series import (
    ClassExponent, FormalSeries, PowerCache, WallAutomorphism, WallFunction, apply_automorphism,
)
from src.core.lattice import IntVec2, RatPoint, sort_ccw
from src.scattering.local_geometry import Germ, germs_at

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

UNIT_X = IntVec2(1, 0)
UNIT_Y = IntVec2(0, 1)

# ===== TYPES & INTERFACES =====

class Grading:
    """Plain grading: the order of a term is its grade."""

    def order_of(self, grade: int) -> int:
        return grade

    def trunc_for(self, order: int) -> int:
        return order


class EncodedGrading(Grading):
    """
    Grades of the form order * big + tag, where tag < big records which parent terms
    were used. Truncating at order k keeps every tag of every order <= k.
    """

    def __init__(self, big: int):
        self.big = big

    def order_of(self, grade: int) -> int:
        return grade // self.big

    def trunc_for(self, order: int) -> int:
        return (order + 1) * self.big - 1


@dataclass
class LoopFactor:
    """One wall crossed by a small counterclockwise loop: its geometric direction, class and sign."""
    direction: IntVec2
    klass: IntVec2
    epsilon: int
    wall: WallFunction
    ray_id: Optional[int] = None

    @property
    def automorphism(self) -> WallAutomorphism:
        return WallAutomorphism(self.wall, self.klass, self.epsilon)


@dataclass
class LoopProduct:
    """The composition of wall-crossings met by a small loop around `point`, in crossing order."""
    point: Optional[RatPoint]
    factors: List[LoopFactor]
    trunc: int
    _caches: Dict[int, PowerCache] = field(default_factory=dict, repr=False)

    def apply(self, g: FormalSeries) -> FormalSeries:
        g = g.truncate(self.trunc)
        for i, factor in enumerate(self.factors):
            if i not in self._caches:
                self._caches[i] = PowerCache(factor.wall.series.truncate(self.trunc))
            g = apply_automorphism(factor.automorphism, g, self._caches[i])
        return g

    def basis_defects(self) -> Tuple[FormalSeries, FormalSeries]:
        """theta(z^(1,0)) - z^(1,0) and theta(z^(0,1)) - z^(0,1)."""
        out = []
        for basis in (UNIT_X, UNIT_Y):
            z = FormalSeries.monomial(basis, 0, 1, self.trunc)
            out.append(self.apply(z) - z)
        return out[0], out[1]

    def is_identity(self) -> bool:
        dx, dy = self.basis_defects()
        return dx.is_zero() and dy.is_zero()

# ===== CORE BUSINESS LOGIC =====

def germ_factor(germ: Germ, ray, trunc: int) -> LoopFactor:
    klass = germ.klass
    wall = ray.wall.reoriented(klass).truncate(trunc)
    return LoopFactor(germ.direction, klass, germ.epsilon, wall, ray.id)


def line_factors(klass: IntVec2, wall: WallFunction, trunc: int) -> List[LoopFactor]:
    """A wall passing straight through the point contributes an incoming and an outgoing germ."""
    w = wall.reoriented(klass).truncate(trunc)
    return [LoopFactor(klass, klass, -1, w), LoopFactor(-klass, klass, 1, w)]


def loop_product(point: Optional[RatPoint], factors: Sequence[LoopFactor], trunc: int) -> LoopProduct:
    return LoopProduct(point, sort_ccw(factors, lambda f: f.direction), trunc)


def theta_loop(diagram, p: RatPoint, N: int, germs: Optional[List[Germ]] = None) -> LoopProduct:
    """
    The loop product around p mod t^(N+1). Points on a cut are handled in the
    unfolded chart of their cut_plus representative.
    """
    base = diagram.base
    if not base.in_box(p, strict=True):
        raise RadiusExceeded(f"{p} is not inside the box of radius {base.radius}",
                             {"point": [str(p.x), str(p.y)], "radius": base.radius})
    q = base.canonical(p)
    s = base.singular_at(q)
    if s is not None:
        raise PointIsSingular(f"{q} is the singular point {s.name}", {"singularity": s.name})
    base.validate_point(q)
    s = base.cut_plus_of(q)
    if s is not None and not base.in_box(s.glue(q), strict=True):
        raise CollisionOnCut(f"{q} sits on the cut of {s.name} but its twin {s.glue(q)} leaves the box",
                             {"singularity": s.name, "point": [str(q.x), str(q.y)]})
    rays = diagram.by_id()
    germs = germs if germs is not None else germs_at(diagram, q)
    return loop_product(q, [germ_factor(g, rays[g.ray_id], N) for g in germs], N)


def read_defect(loop: LoopProduct, order: int, grading: Grading = Grading()) -> Dict[ClassExponent, Fraction]:
    """
    Leading defect of a loop product that is the identity below `order`:
    theta = exp(sum_m c_m t^k z^m d/dlog) at that order. Returns c_m keyed by (m, grade).
    """
    dx, dy = loop.basis_defects()
    for series in (dx, dy):
        for e, _c in series:
            if grading.order_of(e.grade) < order:
                raise InconsistentDiagram(
                    f"loop at {loop.point} is not the identity below order {order}",
                    {"point": [str(loop.point.x), str(loop.point.y)] if loop.point else None,
                     "grade": e.grade})

    from_x: Dict[ClassExponent, Fraction] = {}
    from_y: Dict[ClassExponent, Fraction] = {}
    for e, c in dx:
        m = e.m - UNIT_X
        if m.b == 0:
            logger.warning(f"⚠️ [read_defect] Unbalanced term {c} z^{e.m} in theta(x) at {loop.point}")
            continue
        from_x[ClassExponent(m, e.grade)] = c / m.b
    for e, c in dy:
        m = e.m - UNIT_Y
        if m.a == 0:
            logger.warning(f"⚠️ [read_defect] Unbalanced term {c} z^{e.m} in theta(y) at {loop.point}")
            continue
        from_y[ClassExponent(m, e.grade)] = -c / m.a

    defect = dict(from_x)
    for key, value in from_y.items():
        if key in defect:
            if defect[key] != value:
                logger.warning(f"⚠️ [read_defect] Basis monomials disagree on {key} at {loop.point}: {defect[key]} vs {value}")
            continue
        if key.m.b != 0:
            logger.warning(f"⚠️ [read_defect] {key} missing from theta(x) at {loop.point}")
        defect[key] = value
    return defect


def defect_rays(defect: Dict[ClassExponent, Fraction]) -> Dict[IntVec2, List[Tuple[int, int, Fraction]]]:
    """Groups a defect into outgoing rays: direction -> [(multiple, grade, log coefficient)]."""
    grouped: Dict[IntVec2, List[Tuple[int, int, Fraction]]] = defaultdict(list)
    for e, c in sorted(defect.items(), key=lambda kv: kv[0].sort_key()):
        if c == 0 or e.m.is_zero():
            continue
        j = e.m.content()
        grouped[e.m.primitive()].append((j, e.grade, j * c))
    return dict(grouped)


def scatter_locally(lines: Sequence[Tuple[IntVec2, WallFunction]], N: int,
                    grading: Grading = Grading()) -> Dict[IntVec2, FormalSeries]:
    """
    Completes a set of full lines through one point: returns log f of every outgoing
    ray, keyed by primitive direction, so that the loop product is the identity up to order N.
    """
    top = grading.trunc_for(N)
    outputs: Dict[IntVec2, FormalSeries] = {}
    for k in range(2, N + 1):
        trunc = grading.trunc_for(k)
        factors: List[LoopFactor] = []
        for klass, wall in lines:
            factors.extend(line_factors(klass, wall, trunc))
        for w, log_series in outputs.items():
            factors.append(LoopFactor(w, w, -1, WallFunction(log_series.truncate(trunc).exp(), w)))
        defect = read_defect(loop_product(None, factors, trunc), k, grading)
        for w, terms in defect_rays(defect).items():
            addition = FormalSeries({ClassExponent(w * j, g): c for j, g, c in terms}, top)
            outputs[w] = outputs[w] + addition if w in outputs else addition
    return {w: outputs[w] for w in sorted(outputs)}


def singular_point_consistent(diagram, singularity) -> bool:
    """
    Around a focus-focus point the loop picks up the monodromy: the rays born there,
    taken counterclockwise from cut_plus and followed by the chart change across the
    cut, must act trivially on x and y. Checked as rational functions at t = 1.
    """
    x, y = symbols("x y")

    def mono(m: IntVec2):
        return x ** m.a * y ** m.b

    def as_expr(series: FormalSeries):
        return sum((Rational(c.numerator, c.denominator) * mono(e.m) for e, c in series), Rational(0))

    born = []
    for ray in diagram.rays:
        for seg in ray.support.segments:
            if seg.start == singularity.position:
                born.append((seg.direction, ray.wall.reoriented(seg.direction)))
    gx, gy = x, y
    for klass, wall in sort_ccw(born, lambda item: item[0], ref=singularity.cut_plus):
        f = as_expr(wall.series)
        sub = {x: x * f ** (-UNIT_X.pairing(klass)), y: y * f ** (-UNIT_Y.pairing(klass))}
        gx = gx.subs(sub, simultaneous=True)
        gy = gy.subs(sub, simultaneous=True)
    m_inv = singularity.inverse
    chart = {x: mono(m_inv.apply(UNIT_X)), y: mono(m_inv.apply(UNIT_Y))}
    gx = gx.subs(chart, simultaneous=True)
    gy = gy.subs(chart, simultaneous=True)
    ok = cancel(gx - x) == 0 and cancel(gy - y) == 0
    if not ok:
        logger.warning(f"⚠️ [singular_point_consistent] Loop around {singularity.name} is not the identity")
    return ok
