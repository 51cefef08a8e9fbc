"""Python bindings for the spopo C++ core."""

from ._spopo import *  # noqa: F401,F403
from ._spopo import __version__  # noqa: F401
