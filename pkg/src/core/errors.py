# ===== IMPORTS & DEPENDENCIES =====
from typing import Any, Dict, Optional

# ===== TYPES & INTERFACES =====

class ScatteringError(Exception):
    """
    Root of every domain error raised by the engine.

    The CLI turns these into a JSON report on stderr and exit code 1. `code` is the
    machine-readable name (the class name unless overridden) and `details` carries
    extra context such as the offending point as exact fraction strings.
    """
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def to_payload(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class ConfigError(ScatteringError):
    """Bad command-line or configuration input (exit code 2)."""
    exit_code = 2


class CorruptInput(ScatteringError):
    """A diagram or base file that cannot be read back."""


# --- affine_base ---
class PathThroughSingularity(ScatteringError):
    pass

class RayHitsSingularity(ScatteringError):
    pass

class RayEntersDiscardedSector(ScatteringError):
    pass

class OnBoundary(ScatteringError):
    pass

class InvalidPoint(ScatteringError):
    pass


# --- formal_series ---
class BadConstantTerm(ScatteringError):
    pass


# --- scattering ---
class UnsupportedSingularityType(ScatteringError):
    pass

class PointIsSingular(ScatteringError):
    pass

class CollisionOnCut(ScatteringError):
    pass

class RadiusExceeded(ScatteringError):
    pass

class NoRayThroughPoint(ScatteringError):
    pass

class InconsistentDiagram(ScatteringError):
    """A loop product has a defect below the order being processed."""


# --- broken_lines ---
class EndpointOnWall(ScatteringError):
    pass

class EndpointInDiscardedSector(ScatteringError):
    pass

class NotAdjacent(ScatteringError):
    pass


# --- relative_gw ---
class TrivialMonodromy(ScatteringError):
    pass

class NotStabilized(ScatteringError):
    pass
