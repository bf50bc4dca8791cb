"""Compute-in-memory block RAM simulator and microcode toolkit."""

from . import engine

__version__ = "0.1.0"

engine_name = engine.NAME
