"""Numerics for fractional Hardy-Sobolev problems: constants, the radial
fractional Laplacian, the spherical eigenproblem, ground states and Kelvin
inversion checks."""

from ._fraclab import *  # noqa: F401,F403
from ._fraclab import __doc__  # noqa: F401
