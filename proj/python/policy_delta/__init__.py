"""Off-policy estimators of value differences, and the A/B-testing
estimators they reduce to."""

from ._core import *  # noqa: F401,F403
from ._core import PolicyDeltaError  # noqa: F401

__version__ = "0.1.0"
