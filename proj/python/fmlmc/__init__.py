"""Multilevel Monte Carlo estimation of discretized random fields.

Thin Python layer over the C++ core: grid hierarchies, (filtered) transfer
operators, Hartley-spectral tools, diffusion simulators, estimators, and the
experiment runner.  Fields are plain lists of floats; simulator stacks keep
their hierarchy alive, but the hierarchy object passed to the estimator calls
must be the one the stack was built from.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
