"""Spectral laboratory for dispersive estimates of Schrodinger evolutions."""

from ._displab import *  # noqa: F401,F403
from ._displab import __doc__  # noqa: F401
