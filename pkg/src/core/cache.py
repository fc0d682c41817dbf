# ===== IMPORTS & DEPENDENCIES =====
import hashlib
import json
import logging
import os
from typing import Optional

from src.config import CACHE_DIR, DIAGRAM_SCHEMA_VERSION
from src.core.errors import CorruptInput
from src.scattering.diagram import ScatteringDiagram
from src.utils.serialization import diagram_from_payload, diagram_to_payload, write_json

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== CORE BUSINESS LOGIC =====
class DiagramCache:
    """Completed diagrams on disk, keyed by base, radius, order and file schema."""

    def __init__(self, cache_dir: str = CACHE_DIR):
        self._cache_dir = cache_dir
        os.makedirs(self._cache_dir, exist_ok=True)
        logger.debug(f"[{self.__class__.__name__}] Initialized with cache dir: {self._cache_dir}")

    @staticmethod
    def key_for(base_name: str, radius: int, order: int) -> str:
        return f"{base_name}|R={radius}|N={order}|schema={DIAGRAM_SCHEMA_VERSION}"

    def _get_cache_path(self, key: str) -> str:
        hashed_key = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return os.path.join(self._cache_dir, f"{hashed_key}.json")

    def load(self, base_name: str, radius: int, order: int) -> Optional[ScatteringDiagram]:
        cache_path = self._get_cache_path(self.key_for(base_name, radius, order))
        if not os.path.exists(cache_path):
            logger.debug(f"[{self.__class__.__name__}] No cached diagram at {cache_path}")
            return None
        try:
            with open(cache_path, "r", encoding="utf-8") as f:
                diagram = diagram_from_payload(json.load(f))
        except (json.JSONDecodeError, CorruptInput) as e:
            logger.warning(f"⚠️ [{self.__class__.__name__}] Invalid cache file {cache_path} ({e}). Deleting.")
            os.remove(cache_path)
            return None
        logger.info(f"✅ [{self.__class__.__name__}] Loaded diagram from cache: {cache_path}")
        return diagram

    def store(self, diagram: ScatteringDiagram) -> str:
        cache_path = self._get_cache_path(self.key_for(diagram.base.name, diagram.radius, diagram.order))
        write_json(diagram_to_payload(diagram), cache_path)
        logger.info(f"💾 [{self.__class__.__name__}] Cached diagram ({len(diagram.rays)} rays) at {cache_path}")
        return cache_path
