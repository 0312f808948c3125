"""Precision qudit tomography with Lorentz-transformed measurement protocols."""

from ._ltomo import *  # noqa: F401,F403
from ._ltomo import __version__  # noqa: F401
