"""Truncated q-series arithmetic for eta-quotients and Ramanujan congruences."""

__version__ = "0.1.0"
