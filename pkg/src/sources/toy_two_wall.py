# ===== IMPORTS & DEPENDENCIES =====
import logging
from fractions import Fraction

from src.config import DEFAULT_RADIUS
from src.core.affine_base import AffineBase, Asymptote, InitialWall
from src.core.lattice import IntVec2, RatPoint

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== CORE BUSINESS LOGIC =====

def toy_two_wall_base(radius: int = DEFAULT_RADIUS) -> AffineBase:
    """
    Flat plane with the two walls 1 + t x along the x-axis and 1 + t y along the
    y-axis. The walls are whole lines, entered as rays from the box boundary.
    """
    r = Fraction(radius)
    return AffineBase(
        name="toy-two-wall",
        asymptotes=(
            Asymptote("x", IntVec2(-1, 0), -r, r),
            Asymptote("y", IntVec2(0, -1), -r, r),
        ),
        initial_walls=(
            InitialWall("a", RatPoint(-r, Fraction(0)), IntVec2(1, 0)),
            InitialWall("b", RatPoint(Fraction(0), -r), IntVec2(0, 1)),
        ),
        variables=(("x", IntVec2(1, 0)), ("y", IntVec2(0, 1))),
        radius=radius,
    )


class ToyTwoWallSource:
    """Preset provider for `--base toy-two-wall`."""
    name = "toy-two-wall"

    def build_base(self, radius: int = DEFAULT_RADIUS) -> AffineBase:
        return toy_two_wall_base(radius)
