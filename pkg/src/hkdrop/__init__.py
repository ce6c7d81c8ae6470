"""Numerical companion for the Heintze-Karcher inequality on substrates and sessile droplets."""
from ._accel import backend
from .errors import *  # noqa: F401,F403
from .geometry import (
    FLAT,
    CapSpec,
    ContainerModel,
    GeometryReport,
    MeridianProfile,
    Regime,
    cap_profile,
    cap_report,
    profile_report,
)

__version__ = "0.1.0"
