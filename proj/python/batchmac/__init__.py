"""Batch-arrival models for IEEE 802.15.4 slotted CSMA/CA."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
