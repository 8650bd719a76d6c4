"""Dataset pooling strategies and matching diagnostics (native core)."""

from poolmatch._poolmatch import *  # noqa: F401,F403
from poolmatch._poolmatch import __doc__  # noqa: F401
