# ===== IMPORTS & DEPENDENCIES =====
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from src.core.affine_base import AffineBase, loop_at_infinity
from src.core.errors import InconsistentDiagram, NotStabilized, TrivialMonodromy
from src.core.formal_series import ClassExponent, FormalSeries, extract_omega_tilde, mobius_invert
from src.core.lattice import IntVec2, integer_kernel, is_positive_multiple
from src.scattering.diagram import Ray, ScatteringDiagram

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# Contact order with the boundary cubic per unit of degree.
CONTACT_PER_DEGREE = 3

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class AdmissibleRay:
    """
    A ray leaving the box along the invariant direction of one of the ends.

    Attributes:
        ray_id (int): Id in the diagram.
        exit_direction (IntVec2): Primitive direction after the last cut jump, equal to the end's m_out.
        asymptote (str): Name of that end.
        multiples (tuple): Multiples j of m_out carried by the wall's log terms.
    """
    ray_id: int
    exit_direction: IntVec2
    asymptote: str
    multiples: tuple

    @property
    def torsion(self) -> int:
        return min(self.multiples) if self.multiples else 0

    @property
    def torsion_label(self) -> str:
        return f"{self.torsion}-torsion"


@dataclass
class RayContribution:
    ray_id: int
    torsion: int
    degree: int
    omega_tilde: Fraction
    bps: Optional[Fraction]


@dataclass
class RelGWRow:
    degree: int
    value: Fraction
    bps: Fraction
    integral: bool
    contributions: List[RayContribution] = field(default_factory=list)


@dataclass
class RelGWTable:
    order: int
    rows: List[RelGWRow] = field(default_factory=list)

    def row(self, degree: int) -> RelGWRow:
        for r in self.rows:
            if r.degree == degree:
                return r
        raise KeyError(degree)

# ===== CORE BUSINESS LOGIC =====

def infinity_direction(base: AffineBase) -> IntVec2:
    """Primitive eigenvector of the monodromy at infinity, signed like an outgoing end when one matches."""
    m = loop_at_infinity(base)
    if m.is_identity():
        raise TrivialMonodromy(f"the loop at infinity of '{base.name}' is trivial", {"base": base.name})
    v = integer_kernel(m)
    for a in base.asymptotes:
        if is_positive_multiple(-v, a.m_out):
            return -v
        if is_positive_multiple(v, a.m_out):
            return v
    return v if (v.a, v.b) > (0, 0) else -v


def _admissible(ray: Ray, base: AffineBase) -> Optional[AdmissibleRay]:
    d = ray.exit_direction
    if not ray.support.escaped or d is None:
        return None
    for a in base.asymptotes:
        if is_positive_multiple(d, a.m_out):
            multiples = tuple(sorted({j for j, _g, c in ray.wall.log_terms() if c}))
            return AdmissibleRay(ray.id, d, a.name, multiples)
    return None


def admissible_rays(diagram: ScatteringDiagram) -> List[AdmissibleRay]:
    out = [a for a in (_admissible(r, diagram.base) for r in diagram.rays) if a is not None]
    logger.info(f"✅ [admissible_rays] {len(out)} of {len(diagram.rays)} rays leave along an invariant direction")
    return out


def torsion_label(diagram: ScatteringDiagram, ray_id: int) -> str:
    for a in admissible_rays(diagram):
        if a.ray_id == ray_id:
            return a.torsion_label
    raise KeyError(ray_id)


def f_out(diagram: ScatteringDiagram, N: Optional[int] = None) -> FormalSeries:
    """
    Product of the admissible walls in the single boundary variable: z^(k*m_out) of any
    end is written as exponent (k, 0), grades kept.
    """
    N = diagram.order if N is None else N
    rays = diagram.by_id()
    product = FormalSeries.one(N)
    for a in admissible_rays(diagram):
        wall = rays[a.ray_id].wall
        slot = wall.series.map_exponents(
            lambda e, w=wall: ClassExponent(IntVec2(w.multiple_of(e.m), 0), e.grade))
        product = product * slot.with_trunc(N)
    return product


def _slot_total(log_series: FormalSeries, k: int) -> Fraction:
    return sum((c for e, c in log_series if e.m == IntVec2(k, 0)), Fraction(0))


def relative_gw(diagram: ScatteringDiagram, d: int, check: Optional[ScatteringDiagram] = None) -> Fraction:
    """
    N_{0,d}: the degree-d slot of log f_out divided by 3d, cross-checked against the
    sum of per-ray open invariants. With `check`, a higher-order diagram must agree.
    """
    k = CONTACT_PER_DEGREE * d
    if diagram.order < k:
        logger.warning(f"⚠️ [relative_gw] Order {diagram.order} is below {k}; degree {d} may not be stable")
    from_product = _slot_total(f_out(diagram).log(), k) / k

    rays = diagram.by_id()
    from_rays = Fraction(0)
    for a in admissible_rays(diagram):
        wall = rays[a.ray_id].wall
        from_rays += extract_omega_tilde(wall, wall.dir).get(k, Fraction(0))
    if from_product != from_rays:
        raise InconsistentDiagram(f"degree {d}: log f_out gives {from_product} but the rays give {from_rays}",
                                  {"degree": d, "product": str(from_product), "rays": str(from_rays)})

    if check is not None:
        again = relative_gw(check, d)
        if again != from_product:
            raise NotStabilized(f"degree {d} changes from {from_product} at order {diagram.order} "
                                f"to {again} at order {check.order}",
                                {"degree": d, "value": str(from_product), "check": str(again)})
    return from_product


def per_ray_breakdown(diagram: ScatteringDiagram, d_max: int) -> List[RayContribution]:
    """
    Open invariants per admissible ray and degree, with the BPS count of the ray's
    primitive class gamma_0 = torsion * m_out. Multiple covers use c = (-1)^deg(gamma_0).
    """
    rays = diagram.by_id()
    out: List[RayContribution] = []
    for a in admissible_rays(diagram):
        wall = rays[a.ray_id].wall
        omega = extract_omega_tilde(wall, wall.dir)
        step = a.torsion
        if step == 0:
            continue
        by_multiple = {j // step: v for j, v in omega.items() if j % step == 0}
        primitive_degree = Fraction(step, CONTACT_PER_DEGREE)
        c = -1 if primitive_degree.denominator == 1 and primitive_degree.numerator % 2 else 1
        bps = mobius_invert(by_multiple, c) if by_multiple else {}
        for d in range(1, d_max + 1):
            k = CONTACT_PER_DEGREE * d
            if k not in omega:
                continue
            n = k // step if k % step == 0 else None
            out.append(RayContribution(a.ray_id, a.torsion, d, omega[k], bps.get(n) if n else None))
    return out


def bps_counts(diagram: ScatteringDiagram, d_max: int, check: Optional[ScatteringDiagram] = None) -> RelGWTable:
    contributions = per_ray_breakdown(diagram, d_max)
    table = RelGWTable(diagram.order)
    for d in range(1, d_max + 1):
        mine = [c for c in contributions if c.degree == d]
        bps = sum((c.bps for c in mine if c.bps is not None), Fraction(0))
        integral = all(c.bps is None or c.bps.denominator == 1 for c in mine)
        table.rows.append(RelGWRow(d, relative_gw(diagram, d, check), bps, integral, mine))
        logger.info(f"➡️ [bps_counts] d={d}: N={table.rows[-1].value}, BPS={bps}, integral={integral}")
    return table
