"""Numerics for damped central forces: Kepler <-> oscillator maps, classical and quantum."""

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    DerivedConstants,
    Frame,
    MapReport,
    PhysParams,
    State,
    Trajectory,
    derive_constants,
)

__version__ = "0.1.0"
