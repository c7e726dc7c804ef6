"""Macro-action multi-agent Q-learning (MacDec-MADDRQN and baselines)."""

try:
    from ._macdec import *  # noqa: F401,F403
except ImportError:  # extension built in the CMake tree, not installed
    from _macdec import *  # noqa: F401,F403

__version__ = "0.1.0"
