"""Monte Carlo shooting-and-bouncing-rays radar scattering."""

__version__ = "0.1.0"

from .farfield import SweepResult  # noqa: E402
from .geometry import Scene, load_scene  # noqa: E402
from .scenes import builtin_scene  # noqa: E402
from .solver_det import DetConfig, solve  # noqa: E402
from .solver_mc import McConfig, RouletteConfig, estimate  # noqa: E402
from .tracing import Illumination  # noqa: E402

__all__ = [
    "DetConfig", "Illumination", "McConfig", "RouletteConfig", "Scene", "SweepResult",
    "builtin_scene", "estimate", "load_scene", "solve",
]
