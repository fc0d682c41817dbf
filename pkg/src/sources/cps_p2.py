# ===== IMPORTS & DEPENDENCIES =====
import logging
from fractions import Fraction

from src.config import DEFAULT_RADIUS
from src.core.affine_base import AffineBase, Asymptote, Region, Singularity
from src.core.lattice import IntVec2, Matrix2, RatPoint

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

# ===== CORE BUSINESS LOGIC =====

def cps_p2_base(radius: int = DEFAULT_RADIUS) -> AffineBase:
    """
    The affine base for P^2 minus a smooth cubic: three focus-focus points whose
    cuts l_i^+ / l_i^- are glued by M_1, M_2, M_3. The loop at infinity is
    conjugate to [[1, 9], [0, 1]].
    """
    singularities = (
        Singularity("u1", RatPoint(HALF, HALF), IntVec2(0, 1), IntVec2(1, 0),
                    Matrix2(2, 1, -1, 0), IntVec2(1, -1)),
        Singularity("u2", RatPoint(Fraction(0), -HALF), IntVec2(1, 0), IntVec2(-1, -1),
                    Matrix2(-1, 4, -1, 3), IntVec2(2, 1)),
        Singularity("u3", RatPoint(-HALF, Fraction(0)), IntVec2(-1, -1), IntVec2(0, 1),
                    Matrix2(-1, 1, -4, 3), IntVec2(1, 2)),
    )
    asymptotes = (
        Asymptote("x", IntVec2(1, 0), -HALF, HALF),
        Asymptote("y", IntVec2(0, 1), -HALF, HALF),
        Asymptote("1/xy", IntVec2(-1, -1), -HALF, HALF),
    )
    # Each region lies between two parallel cuts and is closed off through the origin.
    regions = (
        Region("XRegion", "u2", "u1", IntVec2(1, 0)),
        Region("YRegion", "u1", "u3", IntVec2(0, 1)),
        Region("XYInvRegion", "u3", "u2", IntVec2(-1, -1)),
    )
    base = AffineBase(
        name="cps-p2",
        singularities=singularities,
        asymptotes=asymptotes,
        regions=regions,
        variables=(("x", IntVec2(-1, 0)), ("y", IntVec2(0, -1))),
        radius=radius,
    )
    logger.debug(f"[cps_p2_base] Built base with {len(singularities)} singularities, radius {radius}")
    return base


class CPSP2Source:
    """Preset provider for `--base cps-p2`."""
    name = "cps-p2"

    def build_base(self, radius: int = DEFAULT_RADIUS) -> AffineBase:
        return cps_p2_base(radius)
