"""Kinematic bicycle MPC: plant model, linearizations, box QP and closed-loop runs."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
