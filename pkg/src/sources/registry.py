# ===== IMPORTS & DEPENDENCIES =====
import logging
from typing import Dict, Optional

from src.config import BASE_NAMES, DEFAULT_RADIUS
from src.core.affine_base import AffineBase
from src.core.errors import ConfigError, CorruptInput
from src.sources.cps_p2 import CPSP2Source
from src.sources.toy_two_wall import ToyTwoWallSource
from src.utils.serialization import base_from_payload, read_json

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

PRESETS: Dict[str, object] = {
    CPSP2Source.name: CPSP2Source(),
    ToyTwoWallSource.name: ToyTwoWallSource(),
}

# ===== CORE BUSINESS LOGIC =====

def resolve_base(name: str, radius: int = DEFAULT_RADIUS, base_file: Optional[str] = None) -> AffineBase:
    """
    Builds the affine base named on the command line. 'file' reads a base description,
    or the 'base' entry of a saved diagram, from `base_file`.
    """
    if name not in BASE_NAMES:
        raise ConfigError(f"unknown base '{name}' (choose from {', '.join(BASE_NAMES)})", {"base": name})
    if radius < 1:
        raise ConfigError(f"radius must be positive, got {radius}", {"radius": radius})

    if name == "file":
        if not base_file:
            raise ConfigError("--base file needs --base-file PATH")
        data = read_json(base_file)
        if not isinstance(data, dict):
            raise CorruptInput(f"{base_file} does not hold a base description", {"path": base_file})
        base = base_from_payload(data.get("base", data)).with_radius(radius)
        logger.info(f"✅ [resolve_base] Loaded base '{base.name}' from {base_file}")
        return base

    base = PRESETS[name].build_base(radius)
    logger.info(f"✅ [resolve_base] Built preset '{name}' with radius {radius}: "
                f"{len(base.singularities)} singularities, {len(base.initial_walls)} initial walls")
    return base
