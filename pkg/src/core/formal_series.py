# ===== IMPORTS & DEPENDENCIES =====
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from sympy import divisors, mobius

from src.core.errors import BadConstantTerm
from src.core.lattice import IntVec2, Matrix2

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

Coefficient = Union[int, Fraction]

# ===== TYPES & INTERFACES =====

class ClassExponent(NamedTuple):
    """
    Exponent of a monomial t^grade z^m: a boundary class m in the local chart plus
    the order grade standing in for the symplectic area. Wall functions only carry
    grade >= 1 terms besides the unit; grade-0 monomials appear as test monomials (z^(1,0), z^(0,1))
    when a loop product is evaluated.
    """
    m: IntVec2
    grade: int

    def __add__(self, other: "ClassExponent") -> "ClassExponent":  # type: ignore[override]
        return ClassExponent(self.m + other.m, self.grade + other.grade)

    def __sub__(self, other: "ClassExponent") -> "ClassExponent":
        return ClassExponent(self.m - other.m, self.grade - other.grade)

    @property
    def a(self) -> int:
        return self.grade

    def sort_key(self) -> Tuple[int, int, int]:
        return (self.grade, self.m.a, self.m.b)


UNIT = ClassExponent(IntVec2(0, 0), 0)


class FormalSeries:
    """
    A finite sum of c * t^grade * z^m with exact rational coefficients, truncated
    mod t^(trunc + 1). Instances are treated as immutable values.
    """

    __slots__ = ("_terms", "trunc")

    def __init__(self, terms: Optional[Dict[ClassExponent, Coefficient]] = None, trunc: int = 0):
        self.trunc = trunc
        clean: Dict[ClassExponent, Fraction] = {}
        for exponent, coeff in (terms or {}).items():
            if exponent.grade > trunc or coeff == 0:
                continue
            clean[exponent] = Fraction(coeff)
        self._terms = clean

    # --- constructors ---
    @classmethod
    def zero(cls, trunc: int) -> "FormalSeries":
        return cls({}, trunc)

    @classmethod
    def one(cls, trunc: int) -> "FormalSeries":
        return cls({UNIT: 1}, trunc)

    @classmethod
    def monomial(cls, m: IntVec2, grade: int, coeff: Coefficient, trunc: int) -> "FormalSeries":
        return cls({ClassExponent(m, grade): coeff}, trunc)

    @classmethod
    def _raw(cls, terms: Dict[ClassExponent, Fraction], trunc: int) -> "FormalSeries":
        out = cls.__new__(cls)
        out.trunc = trunc
        out._terms = terms
        return out

    # --- inspection ---
    def items(self) -> List[Tuple[ClassExponent, Fraction]]:
        """Terms in canonical order: by grade, then lexicographically on m."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __iter__(self) -> Iterator[Tuple[ClassExponent, Fraction]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, exponent: ClassExponent) -> Fraction:
        return self._terms.get(exponent, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coefficient(UNIT)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return len(self._terms) == 1 and self._terms.get(UNIT) == 1

    def min_grade(self, skip_unit: bool = True) -> Optional[int]:
        grades = [e.grade for e in self._terms if not (skip_unit and e == UNIT)]
        return min(grades) if grades else None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        n = min(self.trunc, other.trunc)
        return self.truncate(n)._terms == other.truncate(n)._terms

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*t^{e.grade}*z^{e.m}" for e, c in self.items()) or "0"
        return f"FormalSeries({body} mod t^{self.trunc + 1})"

    # --- ring operations ---
    def truncate(self, n: int) -> "FormalSeries":
        n = min(n, self.trunc)
        return FormalSeries._raw({e: c for e, c in self._terms.items() if e.grade <= n}, n)

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        n = min(self.trunc, other.trunc)
        acc: Dict[ClassExponent, Fraction] = {e: c for e, c in self._terms.items() if e.grade <= n}
        for e, c in other._terms.items():
            if e.grade > n:
                continue
            v = acc.get(e, 0) + c
            if v:
                acc[e] = v
            else:
                acc.pop(e, None)
        return FormalSeries._raw(acc, n)

    def __neg__(self) -> "FormalSeries":
        return FormalSeries._raw({e: -c for e, c in self._terms.items()}, self.trunc)

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        return self + (-other)

    def scalar_mul(self, k: Coefficient) -> "FormalSeries":
        if k == 0:
            return FormalSeries.zero(self.trunc)
        k = Fraction(k)
        return FormalSeries._raw({e: c * k for e, c in self._terms.items()}, self.trunc)

    def __mul__(self, other: Union["FormalSeries", Coefficient]) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            return self.scalar_mul(other)
        n = min(self.trunc, other.trunc)
        left = sorted(self._terms.items(), key=lambda kv: kv[0].grade)
        right = sorted(other._terms.items(), key=lambda kv: kv[0].grade)
        acc: Dict[Tuple[int, int, int], Fraction] = defaultdict(Fraction)
        for e1, c1 in left:
            if e1.grade > n:
                break
            budget = n - e1.grade
            a1, b1, g1 = e1.m.a, e1.m.b, e1.grade
            for e2, c2 in right:
                if e2.grade > budget:
                    break
                acc[(a1 + e2.m.a, b1 + e2.m.b, g1 + e2.grade)] += c1 * c2
        terms = {ClassExponent(IntVec2(a, b), g): c for (a, b, g), c in acc.items() if c}
        return FormalSeries._raw(terms, n)

    __rmul__ = __mul__

    def power(self, k: int) -> "FormalSeries":
        """f^k for any integer k; negative powers need constant term 1."""
        if k < 0:
            return self.inverse().power(-k)
        result = FormalSeries.one(self.trunc)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "FormalSeries":
        """1/f via the geometric series in (1 - f); requires f = 1 + (grade >= 1 terms)."""
        h = self._require_unit_constant()
        result = FormalSeries.one(self.trunc)
        term = FormalSeries.one(self.trunc)
        neg_h = -h
        while True:
            term = term * neg_h
            if term.is_zero():
                return result
            result = result + term

    def log(self) -> "FormalSeries":
        """Mercator series log(1 + h) = h - h^2/2 + h^3/3 - ..., looped until h^k vanishes."""
        h = self._require_unit_constant()
        result = FormalSeries.zero(self.trunc)
        power = FormalSeries.one(self.trunc)
        k = 0
        while True:
            k += 1
            power = power * h
            if power.is_zero():
                return result
            result = result + power.scalar_mul(Fraction((-1) ** (k + 1), k))

    def exp(self) -> "FormalSeries":
        if any(e.grade < 1 for e in self._terms):
            raise BadConstantTerm("exp needs a series without grade-0 terms",
                                  {"constant": str(self.constant_term())})
        result = FormalSeries.one(self.trunc)
        term = FormalSeries.one(self.trunc)
        k = 0
        while True:
            k += 1
            term = (term * self).scalar_mul(Fraction(1, k))
            if term.is_zero():
                return result
            result = result + term

    def map_exponents(self, fn: Callable[[ClassExponent], ClassExponent]) -> "FormalSeries":
        acc: Dict[ClassExponent, Fraction] = defaultdict(Fraction)
        for e, c in self._terms.items():
            acc[fn(e)] += c
        return FormalSeries({e: c for e, c in acc.items() if c}, self.trunc)

    def transform(self, matrix: Matrix2) -> "FormalSeries":
        """Chart change z^m -> z^(M m), grades untouched."""
        return self.map_exponents(lambda e: ClassExponent(matrix.apply(e.m), e.grade))

    def with_trunc(self, trunc: int) -> "FormalSeries":
        return FormalSeries(dict(self._terms), trunc)

    def _require_unit_constant(self) -> "FormalSeries":
        if self.constant_term() != 1 or any(e.grade < 1 for e in self._terms if e != UNIT):
            raise BadConstantTerm("series must be 1 plus terms of positive grade",
                                  {"constant": str(self.constant_term())})
        return FormalSeries._raw({e: c for e, c in self._terms.items() if e != UNIT}, self.trunc)


@dataclass(frozen=True)
class WallFunction:
    """A slab function 1 + sum c * t^a * z^(j * dir) with dir primitive and j >= 1."""
    series: FormalSeries
    dir: IntVec2

    def __post_init__(self):
        if self.series.constant_term() != 1:
            raise BadConstantTerm(f"wall function along {self.dir} must have constant term 1",
                                  {"constant": str(self.series.constant_term())})
        for e, _ in self.series:
            if e == UNIT:
                continue
            if e.grade < 1 or self.multiple_of(e.m) < 1:
                raise ValueError(f"term {e} of a wall along {self.dir} is not a positive multiple of it")

    def multiple_of(self, m: IntVec2) -> int:
        """j with m = j * dir, or 0 when m is not on the ray of dir."""
        if m.pairing(self.dir) != 0:
            return 0
        j = m.a // self.dir.a if self.dir.a else m.b // self.dir.b
        return j if self.dir * j == m else 0

    @property
    def trunc(self) -> int:
        return self.series.trunc

    def log_terms(self) -> List[Tuple[int, int, Fraction]]:
        """(j, grade, coefficient) of log f in canonical order."""
        return [(self.multiple_of(e.m), e.grade, c) for e, c in self.series.log()]

    def reoriented(self, new_dir: IntVec2) -> "WallFunction":
        """The same function with z^(j * dir) read as z^(j * new_dir), e.g. after a cut jump."""
        if new_dir == self.dir:
            return self
        series = self.series.map_exponents(
            lambda e: e if e == UNIT else ClassExponent(new_dir * self.multiple_of(e.m), e.grade))
        return WallFunction(series, new_dir)

    def truncate(self, n: int) -> "WallFunction":
        return WallFunction(self.series.truncate(n), self.dir)

    @classmethod
    def from_log_terms(cls, direction: IntVec2, terms: Iterable[Tuple[int, int, Coefficient]], trunc: int) -> "WallFunction":
        log_series = FormalSeries({ClassExponent(direction * j, g): c for j, g, c in terms}, trunc)
        return cls(log_series.exp(), direction)

    @classmethod
    def binomial(cls, direction: IntVec2, grade: int, trunc: int, multiple: int = 1) -> "WallFunction":
        """1 + t^grade z^(multiple * direction), the initial slab function."""
        return cls(FormalSeries({UNIT: 1, ClassExponent(direction * multiple, grade): 1}, trunc), direction)


@dataclass(frozen=True)
class WallAutomorphism:
    """z^gamma -> z^gamma * f^(sign * <gamma, gamma_dir>)."""
    f: WallFunction
    gamma_dir: IntVec2
    sign: int = 1

    def inverse(self) -> "WallAutomorphism":
        return WallAutomorphism(self.f, self.gamma_dir, -self.sign)

# ===== CORE BUSINESS LOGIC =====

class PowerCache:
    """Memoised integer powers of a wall function, shared by every monomial an automorphism touches."""

    def __init__(self, f: FormalSeries):
        self._f = f
        self._powers: Dict[int, FormalSeries] = {0: FormalSeries.one(f.trunc), 1: f}

    def get(self, k: int) -> FormalSeries:
        if k not in self._powers:
            if k < 0:
                if -1 not in self._powers:
                    self._powers[-1] = self._f.inverse()
                base, n = self._powers[-1], -k
            else:
                base, n = self._f, k
            self._powers[k] = base.power(n)
        return self._powers[k]


def apply_automorphism(K: WallAutomorphism, g: FormalSeries, cache: Optional[PowerCache] = None) -> FormalSeries:
    """Applies K to every monomial of g, truncating at the smaller of the two orders."""
    trunc = min(g.trunc, K.f.trunc)
    cache = cache or PowerCache(K.f.series.truncate(trunc))
    acc: Dict[ClassExponent, Fraction] = defaultdict(Fraction)
    for exponent, coeff in g:
        if exponent.grade > trunc:
            continue
        k = K.sign * exponent.m.pairing(K.gamma_dir)
        if k == 0:
            acc[exponent] += coeff
            continue
        shifted = (cache.get(k) * FormalSeries._raw({exponent: coeff}, trunc))
        for e, c in shifted.items():
            acc[e] += c
    return FormalSeries({e: c for e, c in acc.items() if c}, trunc)


def extract_omega_tilde(f: WallFunction, gamma_prim: Union[IntVec2, ClassExponent]) -> Dict[int, Fraction]:
    """
    Reads the open invariants off log f = sum_d d * omega(d * gamma) z^(d * gamma),
    summing over grades. Only multiples d >= 1 that occur are reported.
    """
    graded = extract_omega_tilde_graded(f, gamma_prim)
    totals: Dict[int, Fraction] = defaultdict(Fraction)
    for (d, _grade), value in graded.items():
        totals[d] += value
    return {d: v for d, v in sorted(totals.items()) if v}


def extract_omega_tilde_graded(f: WallFunction, gamma_prim: Union[IntVec2, ClassExponent]) -> Dict[Tuple[int, int], Fraction]:
    """Same as extract_omega_tilde but keyed by (multiple, grade)."""
    gamma = (gamma_prim.m if isinstance(gamma_prim, ClassExponent) else gamma_prim).primitive()
    if f.dir != gamma:
        raise ValueError(f"wall along {f.dir} is not supported on multiples of {gamma}")
    out: Dict[Tuple[int, int], Fraction] = {}
    for j, grade, coeff in f.log_terms():
        out[(j, grade)] = coeff / j
    return out


def mobius_invert(omega_tilde: Dict[int, Fraction], c: int) -> Dict[int, Fraction]:
    """
    Omega(d) = -sum_{k | d} c^(d/k) mu(k) omega(d/k) / k^2 for every d up to the largest key.
    Non-integral results are kept and logged; integrality is only expected, not guaranteed.
    """
    if not omega_tilde:
        return {}
    top = max(omega_tilde)
    result: Dict[int, Fraction] = {}
    for d in range(1, top + 1):
        total = Fraction(0)
        for k in divisors(d):
            k = int(k)
            mu = int(mobius(k))
            if mu == 0:
                continue
            total += Fraction(c) ** (d // k) * mu * omega_tilde.get(d // k, Fraction(0)) / (k * k)
        result[d] = -total
        if result[d].denominator != 1:
            logger.warning(f"⚠️ [mobius_invert] Non-integral BPS value {result[d]} at multiple {d}")
    return result


def is_integral(values: Dict[int, Fraction]) -> bool:
    return all(Fraction(v).denominator == 1 for v in values.values())
