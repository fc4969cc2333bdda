"""rotodrum: hard balls and pointlike particles in rotating drums.

Event-driven simulation of elastic balls in a rotating drum with specular
or cosine-law (Knudsen) wall reflections, plus the verification harness
for the conserved rotating-frame energy, the microcanonical ensemble, the
closed-form flight-time and occupation statistics, and the gravity-driven
Fermi-acceleration bounce model.
"""

__version__ = "0.1.0"

from .domains import (
    Ball,
    BallSpec,
    CylinderFinite,
    CylinderTorus,
    Disc2D,
    StarShaped2D,
    SystemState,
)
from .frames import EnergyBreakdown, FrameParams
from .kernels import backend_name

__all__ = [
    "Ball",
    "BallSpec",
    "CylinderFinite",
    "CylinderTorus",
    "Disc2D",
    "EnergyBreakdown",
    "FrameParams",
    "StarShaped2D",
    "SystemState",
    "backend_name",
    "__version__",
]
