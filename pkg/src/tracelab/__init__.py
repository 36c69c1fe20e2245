"""tracelab: a computational laboratory for the Fibonacci trace map
T(x, y, z) = (2xy - z, x, y) on its invariant cubic surfaces."""

__version__ = "0.1.0"

from . import cantor, horseshoe, maps, orbits, periodic, surface  # noqa: F401
