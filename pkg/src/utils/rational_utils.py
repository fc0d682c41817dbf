# ===== IMPORTS & DEPENDENCIES =====
import logging
import re
from fractions import Fraction
from typing import List, Sequence

from src.core.errors import ConfigError
from src.core.lattice import IntVec2, RatPoint, format_rat

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

RATIONAL_PATTERN = re.compile(r"^\s*[-+]?\d+(\s*/\s*\d+)?\s*$")

# ===== UTILITY FUNCTIONS =====

def parse_rational(text: str) -> Fraction:
    """Exact parse of '3', '-1/2' or '+7 / 4'. Decimal notation is refused to keep inputs exact."""
    if text is None or not RATIONAL_PATTERN.match(str(text)):
        raise ConfigError(f"'{text}' is not an exact rational (use p or p/q)", {"value": text})
    value = Fraction(str(text).replace(" ", ""))
    logger.debug(f"[parse_rational] '{text}' -> {value}")
    return value


def parse_point(text: str) -> RatPoint:
    """'x,y' with exact rationals, e.g. '1/100,1/100'."""
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"'{text}' is not a point 'x,y'", {"value": text})
    return RatPoint(parse_rational(parts[0]), parse_rational(parts[1]))


def parse_degrees(text: str) -> List[int]:
    """'1,2' or '1-3' into a sorted list of positive degrees."""
    degrees = set()
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if re.match(r"^\d+-\d+$", chunk):
            lo, hi = (int(v) for v in chunk.split("-"))
            degrees.update(range(lo, hi + 1))
        elif chunk.isdigit():
            degrees.add(int(chunk))
        else:
            raise ConfigError(f"'{text}' is not a list of degrees", {"value": text})
    if not degrees or min(degrees) < 1:
        raise ConfigError(f"degrees must be positive, got '{text}'", {"value": text})
    return sorted(degrees)


def point_to_strings(q: RatPoint) -> List[str]:
    return [format_rat(q.x), format_rat(q.y)]


def point_from_strings(values: Sequence[str]) -> RatPoint:
    return RatPoint(Fraction(values[0]), Fraction(values[1]))


def vec_to_list(v: IntVec2) -> List[int]:
    return [v.a, v.b]


def vec_from_list(values: Sequence[int]) -> IntVec2:
    return IntVec2(int(values[0]), int(values[1]))
