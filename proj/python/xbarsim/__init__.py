"""Memristive crossbar network simulator.

Thin wrapper over the compiled core. Works both installed (extension inside
the package) and from a build tree (extension on sys.path).
"""

try:
    from ._xbarsim import *  # noqa: F401,F403
    from ._xbarsim import __version__  # noqa: F401
except ImportError:  # build-tree layout
    from _xbarsim import *  # noqa: F401,F403
    from _xbarsim import __version__  # noqa: F401
