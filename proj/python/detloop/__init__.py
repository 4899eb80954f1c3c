"""Detection-loophole Bell test toolkit.

Thin wrapper around the compiled ``_detloop`` extension: Bell expressions and
exact local bounds, Schmidt-state correlation tables, the closed-form
measurement constructions, and the threshold/sweep optimizers.
"""

try:
    from ._detloop import *  # noqa: F401,F403
    from ._detloop import __version__  # noqa: F401
except ImportError:  # extension placed on sys.path directly (build tree)
    from _detloop import *  # noqa: F401,F403
    from _detloop import __version__  # noqa: F401
