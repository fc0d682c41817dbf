# ===== IMPORTS & DEPENDENCIES =====
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Dict, List, Optional, Tuple

from src.core.errors import NoRayThroughPoint
from src.core.formal_series import (
    ClassExponent, FormalSeries, UNIT, WallFunction, extract_omega_tilde, extract_omega_tilde_graded,
)
from src.core.lattice import IntVec2, RatPoint
from src.scattering.diagram import Ray, ScatteringDiagram
from src.scattering.local_geometry import germs_at
from src.scattering.loops import EncodedGrading, scatter_locally

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class TreeNode:
    """
    A vertex of a tropical disc. Leaves sit at the origin of an initial ray; an
    internal vertex is the birth point of a scattered ray. `children` pairs every
    incoming edge with its class as seen at this vertex.
    """
    position: RatPoint
    klass: ClassExponent
    ray_id: int
    children: Tuple[Tuple[ClassExponent, "TreeNode"], ...] = ()
    source: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def is_balanced(self) -> bool:
        if self.is_leaf:
            return True
        total = ClassExponent(IntVec2(0, 0), 0)
        for edge_class, _child in self.children:
            total = total + edge_class
        return total == self.klass and all(child.is_balanced() for _c, child in self.children)

    def nodes(self) -> List["TreeNode"]:
        out = [self]
        for _c, child in self.children:
            out.extend(child.nodes())
        return out


@dataclass(frozen=True)
class TreeEdge:
    start: RatPoint
    end: RatPoint
    klass: ClassExponent


@dataclass(frozen=True)
class TropicalDiscTree:
    """
    One summand of a ray's wall function.

    Attributes:
        ray_id (int): Ray whose log term the tree realises.
        root (TreeNode): Birth vertex of the ray (a leaf for initial rays).
        stop (RatPoint): Where the root edge ends (the ray's last point in the box).
        weight (Fraction): Contribution to Omega-tilde of the root class.
    """
    ray_id: int
    root: TreeNode
    stop: RatPoint
    weight: Fraction

    @property
    def total_class(self) -> ClassExponent:
        return self.root.klass

    @property
    def edge_count(self) -> int:
        """Non-contracted edges: one leaving every vertex, the root edge ending at `stop`."""
        return len(self.root.nodes())

    def leaves(self) -> List[str]:
        return sorted(n.source or "" for n in self.root.nodes() if n.is_leaf)

    def edges(self) -> List[TreeEdge]:
        out = [TreeEdge(self.root.position, self.stop, self.root.klass)]
        stack = [self.root]
        while stack:
            node = stack.pop()
            for edge_class, child in node.children:
                out.append(TreeEdge(child.position, node.position, edge_class))
                stack.append(child)
        return out


@dataclass(frozen=True)
class ParentTerm:
    """One log term of a wall passing through a birth point, in the local chart there."""
    ray_id: int
    klass: IntVec2
    j: int
    grade: int
    coeff: Fraction

# ===== UTILITY FUNCTIONS =====

def multinomial(counts: List[int]) -> int:
    out = factorial(sum(counts))
    for c in counts:
        out //= factorial(c)
    return out


def _walls_through(diagram: ScatteringDiagram, u: RatPoint) -> List[Tuple[Ray, IntVec2, bool]]:
    """Each ray meeting u once, with its local class and whether it is born there."""
    q = diagram.base.canonical(u)
    rays = diagram.by_id()
    seen: Dict[Tuple[int, IntVec2], bool] = {}
    for g in germs_at(diagram, q):
        key = (g.ray_id, g.klass)
        seen[key] = seen.get(key, False) or g.born_here
    return [(rays[rid], klass, born) for (rid, klass), born in sorted(seen.items())]

# ===== CORE BUSINESS LOGIC =====

def _matching_product(diagram: ScatteringDiagram, u: RatPoint, gamma_dir: IntVec2, N: Optional[int]) -> WallFunction:
    N = diagram.order if N is None else N
    gamma = gamma_dir.primitive()
    walls = [ray.wall.reoriented(klass) for ray, klass, _ in _walls_through(diagram, u) if klass == gamma]
    if not walls:
        raise NoRayThroughPoint(f"no ray of class {gamma} passes through {u}",
                                {"point": [str(u.x), str(u.y)], "class": [gamma.a, gamma.b]})
    series = FormalSeries.one(N)
    for w in walls:
        series = series * w.series.with_trunc(N)
    return WallFunction(series, gamma)


def omega_trop(diagram: ScatteringDiagram, u: RatPoint, gamma_dir: IntVec2, N: Optional[int] = None) -> Dict[int, Fraction]:
    """Omega-tilde(d * gamma; u) from the product of all walls of class gamma through u."""
    return extract_omega_tilde(_matching_product(diagram, u, gamma_dir, N), gamma_dir)


def omega_trop_graded(diagram: ScatteringDiagram, u: RatPoint, gamma_dir: IntVec2,
                      N: Optional[int] = None) -> Dict[Tuple[int, int], Fraction]:
    return extract_omega_tilde_graded(_matching_product(diagram, u, gamma_dir, N), gamma_dir)


class TreeBuilder:
    """
    Rebuilds tropical discs from provenance. At a birth point the walls passing
    through are re-scattered locally with each log term tagged by its own grade
    digit; the digits of an output term name the parent terms it consumed.
    """

    def __init__(self, diagram: ScatteringDiagram):
        self.diagram = diagram
        self.N = diagram.order
        self.rays = diagram.by_id()
        self._local: Dict[int, Tuple[List[ParentTerm], Dict[Tuple[int, int], List[Tuple[Tuple[Tuple[int, int], ...], Fraction]]]]] = {}
        self._trees: Dict[Tuple[int, int, int], List[Tuple[TreeNode, Fraction]]] = {}

    def _local_expansion(self, ray: Ray):
        if ray.id in self._local:
            return self._local[ray.id]
        q = ray.origin
        terms: List[ParentTerm] = []
        for parent, klass, born in _walls_through(self.diagram, q):
            if born:
                continue
            for j, grade, coeff in parent.wall.reoriented(klass).log_terms():
                if grade < self.N:
                    terms.append(ParentTerm(parent.id, klass, j, grade, coeff))
        base = self.N + 1
        big = base ** len(terms)
        grading = EncodedGrading(big)
        top = grading.trunc_for(self.N)

        by_line: Dict[IntVec2, Dict[ClassExponent, int]] = {}
        for i, t in enumerate(terms):
            by_line.setdefault(t.klass, {})[ClassExponent(t.klass * t.j, t.grade * big + base ** i)] = 1
        lines = [(klass, WallFunction(FormalSeries(tagged, top).exp(), klass)) for klass, tagged in by_line.items()]
        outputs = scatter_locally(lines, self.N, grading)

        expansion: Dict[Tuple[int, int], List] = {}
        for e, coeff in outputs.get(ray.direction, FormalSeries.zero(top)):
            if e == UNIT:
                continue
            order, tag = divmod(e.grade, big)
            counts = []
            for i in range(len(terms)):
                tag, digit = divmod(tag, base)
                if digit:
                    counts.append((i, digit))
            if sum(terms[i].grade * n for i, n in counts) != order:
                logger.warning(f"⚠️ [{self.__class__.__name__}] Tag of {e} does not add up at ray {ray.id}")
            j = ray.wall.multiple_of(e.m)
            expansion.setdefault((j, order), []).append((tuple(counts), coeff))
        logger.debug(f"[{self.__class__.__name__}] Ray {ray.id}: {len(terms)} parent terms at {q}")
        self._local[ray.id] = (terms, expansion)
        return self._local[ray.id]

    def trees(self, ray_id: int, j: int, grade: int) -> List[Tuple[TreeNode, Fraction]]:
        key = (ray_id, j, grade)
        if key in self._trees:
            return self._trees[key]
        ray = self.rays[ray_id]
        klass = ClassExponent(ray.direction * j, grade)
        out: List[Tuple[TreeNode, Fraction]] = []
        if ray.provenance.is_initial:
            coeffs = {(jj, g): c for jj, g, c in ray.wall.log_terms()}
            if coeffs.get((j, grade)):
                leaf = TreeNode(ray.origin, klass, ray.id, source=ray.provenance.source)
                out.append((leaf, coeffs[(j, grade)] / j))
        else:
            terms, expansion = self._local_expansion(ray)
            for counts, P in expansion.get((j, grade), []):
                per_term = []
                for i, n in counts:
                    t = terms[i]
                    sub = self.trees(t.ray_id, t.j, t.grade)
                    edge_class = ClassExponent(t.klass * t.j, t.grade)
                    options = []
                    for combo in combinations_with_replacement(range(len(sub)), n):
                        weight = Fraction(multinomial(list(Counter(combo).values())))
                        for idx in combo:
                            weight *= t.j * sub[idx][1]
                        options.append((tuple((edge_class, sub[idx][0]) for idx in combo), weight))
                    per_term.append(options)
                for choice in product(*per_term):
                    weight = Fraction(P) / j
                    children: Tuple = ()
                    for kids, w in choice:
                        weight *= w
                        children += kids
                    out.append((TreeNode(ray.origin, klass, ray.id, children), weight))
        self._trees[key] = out
        return out


def tropical_discs(diagram: ScatteringDiagram, ray: Ray, builder: Optional[TreeBuilder] = None) -> List[TropicalDiscTree]:
    """Every tropical disc contributing to the ray's wall function, for all of its classes."""
    builder = builder or TreeBuilder(diagram)
    stop = ray.support.segments[-1].end if ray.support.segments else ray.origin
    out: List[TropicalDiscTree] = []
    for j, grade, _c in ray.wall.log_terms():
        for node, weight in builder.trees(ray.id, j, grade):
            out.append(TropicalDiscTree(ray.id, node, stop, weight))
    return out


def tree_weight_sums(trees: List[TropicalDiscTree]) -> Dict[ClassExponent, Fraction]:
    sums: Dict[ClassExponent, Fraction] = {}
    for t in trees:
        sums[t.total_class] = sums.get(t.total_class, Fraction(0)) + t.weight
    return sums
