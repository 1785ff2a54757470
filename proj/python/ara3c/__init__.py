"""Adversarially robust A3C on the pendulum swing-up task.

Thin package wrapper around the compiled _ara3c extension; everything the
extension exports is re-exported here.
"""

from ._ara3c import *  # noqa: F401,F403
from ._ara3c import __doc__  # noqa: F401
