"""Benchmark corpus (``*.pl``) and the timing harness."""

from .harness import *  # noqa: F401,F403
from .harness import __all__  # noqa: F401
