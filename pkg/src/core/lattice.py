# ===== IMPORTS & DEPENDENCIES =====
import logging
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from math import gcd
from typing import Callable, Iterable, List, NamedTuple, Sequence, Tuple, TypeVar, Union

from sympy import Matrix, eye, ilcm

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

Rat = Fraction
RatLike = Union[int, str, Fraction]
T = TypeVar("T")

# ===== TYPES & INTERFACES =====

class IntVec2(NamedTuple):
    """An integral tangent vector, also used for boundary classes. Arithmetic is componentwise."""
    a: int
    b: int

    def __add__(self, other: "IntVec2") -> "IntVec2":  # type: ignore[override]
        return IntVec2(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "IntVec2") -> "IntVec2":
        return IntVec2(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "IntVec2":
        return IntVec2(-self.a, -self.b)

    def __mul__(self, k: int) -> "IntVec2":  # type: ignore[override]
        return IntVec2(self.a * k, self.b * k)

    __rmul__ = __mul__

    def pairing(self, other: "IntVec2") -> int:
        """The symplectic pairing <v, w> = v.a * w.b - v.b * w.a."""
        return self.a * other.b - self.b * other.a

    def content(self) -> int:
        return gcd(self.a, self.b)

    def primitive(self) -> "IntVec2":
        g = self.content()
        if g == 0:
            raise ValueError("the zero vector has no primitive direction")
        return IntVec2(self.a // g, self.b // g)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self) -> str:
        return f"({self.a},{self.b})"


class RatPoint(NamedTuple):
    """A point of the chart with exact rational coordinates."""
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x: RatLike, y: RatLike) -> "RatPoint":
        return cls(Fraction(x), Fraction(y))

    def shifted(self, v: Sequence, s: RatLike = 1) -> "RatPoint":
        s = Fraction(s)
        return RatPoint(self.x + s * v[0], self.y + s * v[1])

    def minus(self, other: "RatPoint") -> Tuple[Fraction, Fraction]:
        return (self.x - other.x, self.y - other.y)

    def __str__(self) -> str:
        return f"({format_rat(self.x)},{format_rat(self.y)})"


class Matrix2(NamedTuple):
    """The integer matrix [[a, b], [c, d]] acting on column vectors."""
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Matrix2":
        return cls(int(rows[0][0]), int(rows[0][1]), int(rows[1][0]), int(rows[1][1]))

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_sympy(cls, m: Matrix) -> "Matrix2":
        return cls(*(int(x) for x in m))

    def rows(self) -> List[List[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def to_sympy(self) -> Matrix:
        return Matrix(self.rows())

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def trace(self) -> int:
        return self.a + self.d

    def is_identity(self) -> bool:
        return self == Matrix2.identity()

    def apply(self, v: IntVec2) -> IntVec2:
        return IntVec2(self.a * v.a + self.b * v.b, self.c * v.a + self.d * v.b)

    def apply_rat(self, v: Sequence) -> Tuple[Fraction, Fraction]:
        return (self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Matrix2":
        return _sl2_inverse(self)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"

# ===== UTILITY FUNCTIONS =====

@lru_cache(maxsize=None)
def _sl2_inverse(m: Matrix2) -> Matrix2:
    if m.det() != 1:
        raise ValueError(f"only SL(2,Z) matrices are inverted exactly, got det {m.det()}")
    return Matrix2.from_sympy(m.to_sympy().inv())


def format_rat(value: Fraction) -> str:
    """Exact fraction string: '3', '-1/2'."""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def cross(u: Sequence, v: Sequence):
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Sequence, v: Sequence):
    return u[0] * v[0] + u[1] * v[1]


def is_positive_multiple(u: Sequence, v: Sequence) -> bool:
    """True if u = lambda * v for some lambda > 0."""
    return cross(u, v) == 0 and dot(u, v) > 0


def _half(ref: Sequence, v: Sequence) -> int:
    c = cross(ref, v)
    if c > 0 or (c == 0 and dot(ref, v) > 0):
        return 0
    return 1


def ccw_compare(ref: Sequence, u: Sequence, v: Sequence) -> int:
    """Compares u and v by counterclockwise angle measured from ref, in [0, 2*pi)."""
    hu, hv = _half(ref, u), _half(ref, v)
    if hu != hv:
        return hu - hv
    c = cross(u, v)
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def sort_ccw(items: Iterable[T], direction: Callable[[T], Sequence], ref: Sequence = (1, 0)) -> List[T]:
    """Sorts items by the exact counterclockwise angle of direction(item) from ref. Stable on ties."""
    return sorted(items, key=cmp_to_key(lambda p, q: ccw_compare(ref, direction(p), direction(q))))


def in_open_cone(start: Sequence, end: Sequence, w: Sequence) -> bool:
    """True if w lies strictly counterclockwise between start and end (a convex cone)."""
    return cross(start, w) > 0 and cross(w, end) > 0


def segment_meets_open_cone(apex: RatPoint, start: Sequence, end: Sequence, a: RatPoint, b: RatPoint) -> bool:
    """
    Whether the closed segment [a, b] meets the open convex cone at apex spanned
    counterclockwise from start to end. Each cone inequality is affine in the
    segment parameter s, so the test reduces to intersecting open intervals with [0, 1].
    """
    wa = a.minus(apex)
    ab = b.minus(a)
    lo, hi = None, None
    for constant, slope in ((cross(start, wa), cross(start, ab)), (cross(wa, end), cross(ab, end))):
        if slope == 0:
            if constant <= 0:
                return False
            continue
        root = Fraction(-constant, 1) / slope
        if slope > 0:
            lo = root if lo is None else max(lo, root)
        else:
            hi = root if hi is None else min(hi, root)
    if lo is not None and hi is not None and lo >= hi:
        return False
    if lo is not None and lo >= 1:
        return False
    if hi is not None and hi <= 0:
        return False
    return True


def point_on_segment(p: RatPoint, a: RatPoint, b: RatPoint) -> bool:
    ap, ab = p.minus(a), b.minus(a)
    if cross(ap, ab) != 0:
        return False
    t = dot(ap, ab)
    return 0 <= t <= dot(ab, ab)


def unipotent_conjugacy_index(m: Matrix2) -> int:
    """
    For M in SL(2,Z) with trace 2 and M != I, returns d such that M is conjugate to
    [[1, d], [0, 1]] up to sign of d (the gcd of the entries of M - I). Returns 0 otherwise.
    """
    if m.det() != 1 or m.trace() != 2 or m.is_identity():
        return 0
    return gcd(gcd(m.a - 1, m.b), gcd(m.c, m.d - 1))


def integer_kernel(m: Matrix2) -> IntVec2:
    """Primitive generator of ker(M - I) for a unipotent M != I (sign not normalised)."""
    basis = (m.to_sympy() - eye(2)).nullspace()
    if len(basis) != 1:
        raise ValueError(f"ker(M - I) has rank {len(basis)} for M = {m}, expected 1")
    v = basis[0]
    scale = ilcm(v[0].q, v[1].q)
    return IntVec2(int(v[0] * scale), int(v[1] * scale)).primitive()
