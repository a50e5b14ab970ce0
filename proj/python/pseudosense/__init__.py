"""Pseudo multi-sense detection and removal for multi-sense word embeddings."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
