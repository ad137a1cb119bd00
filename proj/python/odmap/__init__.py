"""Orthodiagonal maps: generation, validation, discrete harmonic functions and circle packings."""

from ._odmap import *  # noqa: F401,F403
from ._odmap import __doc__  # noqa: F401
