# ===== TYPES & INTERFACES =====

from typing import TypedDict, List, Optional


class RunConfig(TypedDict, total=False):
    """
    Settings of one CLI invocation, filled from flags and environment defaults.

    Attributes:
        command (str): Subcommand name ('scatter', 'potential', 'relgw', 'verify', 'plot').
        base (str): Preset name or 'file'.
        base_file (Optional[str]): Diagram or base JSON used with `--base file`.
        order (int): Truncation order N >= 1.
        radius (int): Half-width R of the bounding box.
        threads (int): Worker threads for loop products and broken-line searches.
        at (Optional[str]): Endpoint as 'x,y' with exact fraction strings.
        diagram (Optional[str]): Input diagram path for consumers.
        output (Optional[str]): Output path.
        svg (Optional[str]): Optional SVG output path.
        use_cache (bool): Whether completed diagrams are read from / written to the cache.
        width (int): SVG width in pixels.
        height (int): SVG height in pixels.
        reverse (bool): Process collision points in reverse order (determinism checks).
        offset (bool): Move an endpoint lying on a wall by the suggested exact offset instead of failing.
        sweep (bool): Evaluate W on a grid and group the points into chambers.
        extent (str): Half-width of the sweep grid as an exact rational.
        step (str): Spacing of the sweep grid as an exact rational.
        degrees (Optional[str]): Degrees for relgw, '1,2' or '1-3'.
        csv (bool): Print the relgw table as CSV with a header.
        stabilize (bool): Recompute at order N+1 and require equal invariants.
        samples (int): Number of wall-crossing checks run by verify.
    """
    command: str
    base: str
    base_file: Optional[str]
    order: Optional[int]
    radius: int
    threads: int
    at: Optional[str]
    diagram: Optional[str]
    output: Optional[str]
    svg: Optional[str]
    use_cache: bool
    width: int
    height: int
    reverse: bool
    offset: bool
    sweep: bool
    extent: str
    step: str
    degrees: Optional[str]
    csv: bool
    stabilize: bool
    samples: int


class SeriesTermPayload(TypedDict):
    """One term c * t^grade * z^m, the coefficient as an exact fraction string."""
    m: List[int]
    grade: int
    coeff: str


class ProvenancePayload(TypedDict, total=False):
    kind: str
    source: Optional[str]
    sign: int
    point: Optional[List[str]]
    parents: List[int]
    order: int


class CrossingPayload(TypedDict):
    singularity: str
    orientation: int
    point: List[str]
    before_segment: int


class RayPayload(TypedDict, total=False):
    """
    A ray as written to diagram files.

    Attributes:
        id (int): Stable ray id; ids of a completed diagram do not depend on thread count.
        origin (List[str]): Birth point as fraction strings.
        direction (List[int]): Primitive class at the origin.
        polyline (List[List[List[str]]]): Segments as [start, end] point pairs.
        crossings (List[CrossingPayload]): Cut jumps along the support.
        escaped (bool): Whether the support leaves the box.
        final_direction (Optional[List[int]]): Direction after the last jump.
        wall (List[SeriesTermPayload]): Wall function terms in canonical order.
        provenance (ProvenancePayload): Initial or scattered origin of the ray.
    """
    id: int
    origin: List[str]
    direction: List[int]
    polyline: List[List[List[str]]]
    crossings: List[CrossingPayload]
    escaped: bool
    final_direction: Optional[List[int]]
    wall: List[SeriesTermPayload]
    provenance: ProvenancePayload


class SingularityPayload(TypedDict, total=False):
    name: str
    position: List[str]
    cut_plus: List[int]
    cut_minus: List[int]
    matrix: List[List[int]]
    invariant_dir: Optional[List[int]]


class BasePayload(TypedDict, total=False):
    name: str
    radius: int
    singularities: List[SingularityPayload]
    asymptotes: List[dict]
    regions: List[dict]
    initial_walls: List[dict]
    variables: List[dict]


class DiagramPayload(TypedDict, total=False):
    schema: int
    order: int
    base: BasePayload
    rays: List[RayPayload]


class BrokenLinePayload(TypedDict, total=False):
    asymptote: str
    klass: SeriesTermPayload
    weight: str
    segments: List[dict]
    bends: List[dict]


class RelGWRowPayload(TypedDict, total=False):
    degree: int
    value: str
    bps: str
    integral: bool
    contributions: List[dict]


class SuperpotentialPayload(TypedDict, total=False):
    """
    W^trop at one endpoint as written by `potential -o`.

    Attributes:
        point (List[str]): Endpoint actually used, after any offset.
        offset (Optional[List[str]]): Shift applied to the requested endpoint, if any.
        order (int): Truncation order N.
        display (str): W in the base's display variables, e.g. 'x + y + x^-1*y^-1'.
        terms (List[SeriesTermPayload]): Class -> weighted count, canonical order.
        lines (List[BrokenLinePayload]): Every contributing broken line.
    """
    point: List[str]
    offset: Optional[List[str]]
    order: int
    display: str
    terms: List[SeriesTermPayload]
    lines: List[BrokenLinePayload]
