"""Trapped interacting particles and paths: python bindings to the C++ core.

Field arrays are flat with axis 0 fastest; reshape with order='F' to get
(n, n, ...) arrays on the grid.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
