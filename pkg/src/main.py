# ===== IMPORTS & DEPENDENCIES =====
import argparse
import asyncio
import csv
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Optional, Sequence

# --- Configuration ---
from src.config import (
    BASE_NAMES, CACHE_ENABLED, DEFAULT_ORDER, DEFAULT_RADIUS, DEFAULT_THREADS, LOG_LEVEL,
    RANDOM_SEED, SVG_HEIGHT, SVG_WIDTH, SWEEP_EXTENT, SWEEP_STEP, WALLCROSS_SAMPLES,
)

# --- Core Components ---
from src.core.cache import DiagramCache
from src.core.errors import ConfigError, EndpointOnWall, ScatteringError
from src.core.formal_series import FormalSeries
from src.core.lattice import RatPoint, format_rat

# --- Data Models ---
from src.models.payloads import RunConfig

# --- Sources ---
from src.sources.registry import resolve_base

# --- Scattering, Broken Lines, Invariants ---
from src.scattering.completion import ScatteringEngine
from src.scattering.diagram import ScatteringDiagram, initial_diagram
from src.broken_lines.enumeration import validate_endpoint
from src.broken_lines.superpotential import (
    check_wallcrossings, format_series, superpotential, sweep_superpotentials,
)
from src.invariants.relative_gw import CONTACT_PER_DEGREE, bps_counts

# --- Utility Functions ---
from src.utils.rational_utils import parse_degrees, parse_point, parse_rational
from src.utils.serialization import (
    diagram_to_payload, load_diagram, relgw_row_to_payload, superpotential_to_payload, write_json,
)
from src.utils.svg_plot import write_svg

# ===== CONFIGURATION & CONSTANTS =====
logging.basicConfig(
    level=LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

# ===== CORE BUSINESS LOGIC / PIPELINE =====
class ScatteringPipeline:
    """Runs one CLI command: builds or loads a diagram, then queries, verifies or draws it."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.engine = ScatteringEngine(config["threads"], config.get("reverse", False))
        self.cache = DiagramCache() if config.get("use_cache") else None

    def _emit(self, text: str) -> None:
        print(text, flush=True)

    async def _build_diagram(self, order: int) -> ScatteringDiagram:
        logger.info(f"--- Step 1: Building base '{self.config['base']}' ---")
        base = resolve_base(self.config["base"], self.config["radius"], self.config.get("base_file"))

        use_cache = self.cache is not None and self.config["base"] != "file"
        if use_cache:
            cached = self.cache.load(base.name, base.radius, order)
            if cached is not None:
                return cached

        logger.info(f"--- Step 2: Completing the scattering diagram to order {order} ---")
        diagram = await self.engine.complete(initial_diagram(base, order), order)
        if use_cache:
            self.cache.store(diagram)
        return diagram

    async def _at_order(self, diagram: ScatteringDiagram, order: Optional[int]) -> ScatteringDiagram:
        if order is None or order == diagram.order:
            return diagram
        if order > diagram.order:
            logger.info(f"➡️ [{self.__class__.__name__}] Extending the diagram from order {diagram.order} to {order}")
            return await self.engine.complete(diagram, order)
        return ScatteringDiagram(diagram.base, [replace(r, wall=r.wall.truncate(order)) for r in diagram.rays], order)

    async def _diagram(self) -> ScatteringDiagram:
        """The positional diagram file when given, otherwise the preset completed to --order."""
        if self.config.get("diagram"):
            logger.info(f"--- Step 1: Loading diagram {self.config['diagram']} ---")
            diagram = load_diagram(self.config["diagram"])
            return await self._at_order(diagram, self.config.get("order"))
        return await self._build_diagram(self.config.get("order") or DEFAULT_ORDER)

    # --- commands ---
    async def run_scatter(self) -> int:
        diagram = await self._build_diagram(self.config.get("order") or DEFAULT_ORDER)
        logger.info("--- Step 3: Writing the diagram ---")
        if self.config.get("output"):
            write_json(diagram_to_payload(diagram), self.config["output"])
        else:
            self._emit(json.dumps(diagram_to_payload(diagram), ensure_ascii=False, indent=4))
        if self.config.get("svg"):
            write_svg(diagram, self.config["svg"], width=self.config["width"], height=self.config["height"])
        return 0

    def _endpoint(self, diagram: ScatteringDiagram) -> tuple:
        u = parse_point(self.config["at"])
        try:
            validate_endpoint(diagram, u)
            return u, None
        except EndpointOnWall as e:
            suggested = e.details.get("suggested")
            if not self.config.get("offset") or not suggested:
                raise
            moved = RatPoint(Fraction(suggested[0]), Fraction(suggested[1]))
            logger.warning(f"⚠️ [{self.__class__.__name__}] Endpoint {u} lies on a wall; using {moved}")
            return moved, (moved.x - u.x, moved.y - u.y)

    async def run_potential(self) -> int:
        diagram = await self._diagram()
        N = diagram.order
        threads = self.config["threads"]

        if self.config.get("sweep"):
            logger.info("--- Step 3: Sweeping superpotentials over the grid ---")
            chambers = await asyncio.to_thread(
                sweep_superpotentials, diagram, parse_rational(self.config["extent"]),
                parse_rational(self.config["step"]), N, threads)
            for i, chamber in enumerate(chambers, 1):
                w = format_series(FormalSeries(chamber.terms, N), diagram.base)
                self._emit(f"chamber {i}: {len(chamber.points)} points, e.g. {chamber.points[0]}: W = {w}")
            return 0

        u, offset = self._endpoint(diagram)
        logger.info(f"--- Step 3: Enumerating broken lines at {u} ---")
        w = await asyncio.to_thread(superpotential, diagram, u, N, threads)
        self._emit(f"W{u} = {w.display(diagram.base)}")
        if self.config.get("output"):
            write_json(superpotential_to_payload(w, diagram.base, offset), self.config["output"])
        if self.config.get("svg"):
            write_svg(diagram, self.config["svg"], w.lines, self.config["width"], self.config["height"])
        return 0

    async def run_relgw(self) -> int:
        diagram = await self._diagram()
        if self.config.get("degrees"):
            degrees = parse_degrees(self.config["degrees"])
        else:
            degrees = list(range(1, max(1, diagram.order // CONTACT_PER_DEGREE) + 1))

        check = None
        if self.config.get("stabilize"):
            logger.info(f"--- Step 3: Building the order {diagram.order + 1} diagram for the stability check ---")
            check = await self.engine.complete(diagram, diagram.order + 1)

        logger.info(f"--- Step 4: Relative invariants for degrees {degrees} ---")
        table = bps_counts(diagram, max(degrees), check)
        rows = [table.row(d) for d in degrees]
        for row in rows:
            if not row.integral:
                logger.warning(f"⚠️ [{self.__class__.__name__}] BPS counts of degree {row.degree} are not integral")

        if self.config.get("csv"):
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerow(["d", "N", "BPS"])
            for row in rows:
                writer.writerow([row.degree, format_rat(row.value), format_rat(row.bps)])
        else:
            for row in rows:
                self._emit(f"{row.degree}, {format_rat(row.value)}, {format_rat(row.bps)}")
        if self.config.get("output"):
            write_json({"order": diagram.order, "rows": [relgw_row_to_payload(r) for r in rows]},
                       self.config["output"])
        return 0

    async def run_verify(self) -> int:
        diagram = await self._diagram()
        logger.info("--- Step 3: Checking every loop product ---")
        defects = await self.engine.find_defects(diagram)
        self._emit(f"{len(defects)} defects")
        for d in defects:
            where = f"singularity {d.singularity}" if d.singularity else f"grade {d.min_grade}"
            self._emit(f"  defect at {d.point} ({where})")

        samples = self.config.get("samples", WALLCROSS_SAMPLES)
        logger.info(f"--- Step 4: Running {samples} wall-crossing checks ---")
        report = await asyncio.to_thread(check_wallcrossings, diagram, samples, diagram.order,
                                         self.config["threads"], RANDOM_SEED)
        for ray_id, u1, u2 in report.failures:
            self._emit(f"  wall-crossing failure across ray {ray_id} between {u2} and {u1}")
        self._emit(f"{report.checked} wall-crossing checks, {len(report.failures)} failed")
        return 1 if defects or report.failures else 0

    async def run_plot(self) -> int:
        diagram = await self._diagram()
        lines = None
        if self.config.get("at"):
            u, _ = self._endpoint(diagram)
            lines = (await asyncio.to_thread(superpotential, diagram, u, diagram.order,
                                             self.config["threads"])).lines
        logger.info("--- Step 3: Rendering SVG ---")
        write_svg(diagram, self.config["output"], lines, self.config["width"], self.config["height"])
        return 0

    async def run(self) -> int:
        command = self.config["command"]
        logger.info(f"🚀🚀🚀 Starting '{command}' 🚀🚀🚀")
        handler = getattr(self, f"run_{command}")
        code = await handler()
        logger.info(f"🏁🏁🏁 '{command}' finished with exit code {code} 🏁🏁🏁")
        return code

# ===== UTILITY FUNCTIONS =====

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", choices=BASE_NAMES, default="cps-p2", help="Affine base preset (default: cps-p2).")
    common.add_argument("--base-file", help="Base or diagram JSON used with --base file.")
    common.add_argument("--order", type=int, default=None, help=f"Truncation order N (default: {DEFAULT_ORDER}).")
    common.add_argument("--radius", type=int, default=DEFAULT_RADIUS, help="Half-width R of the bounding box.")
    common.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="Worker threads.")
    common.add_argument("--no-cache", action="store_true", help="Neither read nor write the diagram cache.")
    common.add_argument("--reverse-order", action="store_true", help=argparse.SUPPRESS)
    common.add_argument("--width", type=int, default=SVG_WIDTH, help="SVG width in pixels.")
    common.add_argument("--height", type=int, default=SVG_HEIGHT, help="SVG height in pixels.")

    parser = argparse.ArgumentParser(prog="scattering", description="Exact scattering diagrams, broken lines "
                                     "and relative invariants for the complement of a cubic in the plane.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", parents=[common], help="Complete a scattering diagram and write it as JSON.")
    p.add_argument("-o", "--output", help="Diagram JSON path (stdout when omitted).")
    p.add_argument("--svg", help="Also render the diagram to this SVG file.")

    p = sub.add_parser("potential", parents=[common], help="Tropical superpotential at an endpoint.")
    p.add_argument("diagram", nargs="?", help="Diagram JSON (otherwise --base is completed to --order).")
    p.add_argument("--at", help="Endpoint 'x,y' with exact rationals, e.g. 1/100,1/100.")
    p.add_argument("--offset", action="store_true", help="Move an endpoint on a wall by the suggested offset.")
    p.add_argument("--sweep", action="store_true", help="Group grid points into chambers of equal W.")
    p.add_argument("--extent", default=SWEEP_EXTENT, help="Half-width of the sweep grid.")
    p.add_argument("--step", default=SWEEP_STEP, help="Spacing of the sweep grid.")
    p.add_argument("-o", "--output", help="Superpotential JSON path.")
    p.add_argument("--svg", help="Diagram SVG with the broken lines drawn on top.")

    p = sub.add_parser("relgw", parents=[common], help="Relative invariants and BPS counts by degree.")
    p.add_argument("diagram", nargs="?", help="Diagram JSON (otherwise --base is completed to --order).")
    p.add_argument("--degrees", help="Degrees as '1,2' or '1-3' (default: 1 .. N/3).")
    p.add_argument("--csv", action="store_true", help="CSV output with a header row.")
    p.add_argument("--stabilize", action="store_true", help="Require equal values at order N+1.")
    p.add_argument("-o", "--output", help="Table JSON path with per-ray contributions.")

    p = sub.add_parser("verify", parents=[common], help="Consistency and wall-crossing checks.")
    p.add_argument("diagram", nargs="?", help="Diagram JSON (otherwise --base is completed to --order).")
    p.add_argument("--samples", type=int, default=WALLCROSS_SAMPLES, help="Number of wall-crossing samples.")

    p = sub.add_parser("plot", parents=[common], help="Render a diagram as SVG.")
    p.add_argument("diagram", nargs="?", help="Diagram JSON (otherwise --base is completed to --order).")
    p.add_argument("-o", "--output", required=True, help="SVG path.")
    p.add_argument("--at", help="Overlay the broken lines ending at 'x,y'.")
    p.add_argument("--offset", action="store_true", help="Move an endpoint on a wall by the suggested offset.")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    if args.order is not None and args.order < 1:
        raise ConfigError(f"--order must be at least 1, got {args.order}", {"order": args.order})
    if args.radius < 1:
        raise ConfigError(f"--radius must be positive, got {args.radius}", {"radius": args.radius})
    if args.threads < 1:
        raise ConfigError(f"--threads must be positive, got {args.threads}", {"threads": args.threads})
    if args.width < 1 or args.height < 1:
        raise ConfigError("SVG dimensions must be positive", {"width": args.width, "height": args.height})
    if args.base == "file" and not args.base_file:
        raise ConfigError("--base file needs --base-file PATH")
    if args.command == "potential" and not args.sweep and not args.at:
        raise ConfigError("potential needs --at x,y (or --sweep)")
    if getattr(args, "at", None):
        parse_point(args.at)

    config: RunConfig = {
        "command": args.command,
        "base": args.base,
        "base_file": args.base_file,
        "order": args.order,
        "radius": args.radius,
        "threads": args.threads,
        "use_cache": CACHE_ENABLED and not args.no_cache,
        "reverse": args.reverse_order,
        "width": args.width,
        "height": args.height,
    }
    for key in ("diagram", "output", "svg", "at", "offset", "sweep", "extent", "step", "degrees", "csv",
                "stabilize", "samples"):
        if hasattr(args, key):
            config[key] = getattr(args, key)
    logger.debug(f"[build_config] {config}")
    return config

# ===== INITIALIZATION & STARTUP =====
def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return asyncio.run(ScatteringPipeline(config).run())
    except ScatteringError as e:
        logger.error(f"❌ {e.code}: {e.message}")
        print(json.dumps(e.to_payload(), ensure_ascii=False), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.critical(f"🔥🔥🔥 A critical error occurred in the pipeline: {e}", exc_info=True)
        print(json.dumps({"error": "InternalError", "message": str(e), "details": {}}, ensure_ascii=False),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
