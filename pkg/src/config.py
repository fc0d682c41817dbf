# ===== CONFIGURATION & CONSTANTS =====
import os

# --- General Settings ---
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
CACHE_DIR = os.getenv("SCATTER_CACHE_DIR", "cache")
CACHE_ENABLED = os.getenv("SCATTER_CACHE_ENABLED", "1") == "1"
DIAGRAM_SCHEMA_VERSION = 2

# --- Scattering ---
DEFAULT_ORDER = int(os.getenv("SCATTER_ORDER", "6"))
DEFAULT_RADIUS = int(os.getenv("SCATTER_RADIUS", "8"))
DEFAULT_THREADS = int(os.getenv("SCATTER_THREADS", "4"))
MAX_SEGMENTS = 64  # per traced ray; CPS rays refract at most a handful of times inside R = 8

# --- Base Presets ---
BASE_NAMES = ["cps-p2", "toy-two-wall", "file"]

# --- Broken Lines ---
# Any point of the central triangle works; this one avoids every rational line the diagrams use.
HUB_POINT = ("1/97", "1/89")
ENDPOINT_OFFSET = "1/1000"
OFFSET_DIRECTIONS = [(1, 1), (1, -1), (-1, 1), (-1, -1), (1, 2), (2, 1), (-1, 2), (2, -1)]
OFFSET_SCALES = ["1", "1/10", "1/100"]
# Rounds of re-searching classes met at bends near the endpoint before the class set is final.
CANDIDATE_ROUNDS = int(os.getenv("SCATTER_CANDIDATE_ROUNDS", "6"))
SWEEP_STEP = "1/2"
SWEEP_EXTENT = "3"

# --- Verification ---
WALLCROSS_SAMPLES = 20
RANDOM_SEED = 168
WALLCROSS_ATTEMPTS = 10  # draws per requested check before giving up on skipped samples

# --- SVG Rendering ---
SVG_WIDTH = 800
SVG_HEIGHT = 800
SVG_MARGIN = 20
SVG_BACKGROUND = "#ffffff"
SVG_CUT_COLOR = "#888888"
SVG_SINGULARITY_COLOR = "#d62728"
SVG_BROKEN_LINE_COLOR = "#2ca02c"
SVG_BOX_COLOR = "#cccccc"
# Indexed by the lowest grade carried by a ray's wall function; the last colour repeats.
SVG_ORDER_PALETTE = ["#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f"]
