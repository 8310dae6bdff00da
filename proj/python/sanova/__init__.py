"""Smoothed-ANOVA spatial disease mapping: python bindings over the C++ core."""

from ._sanova import *  # noqa: F401,F403
from ._sanova import __doc__  # noqa: F401
