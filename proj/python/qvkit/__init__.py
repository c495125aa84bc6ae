"""Quadratic and gamma-power voting analysis (C++ core)."""

from ._qvkit import *  # noqa: F401,F403
from ._qvkit import QvkitError

__all__ = [name for name in dir() if not name.startswith("_")]
