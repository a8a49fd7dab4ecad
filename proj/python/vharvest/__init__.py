"""Throughput and black-out analysis of RF energy harvesting from vehicular traffic."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401


def scenario(ell=4.0, **overrides):
    """Default scenario with the given harvest distance; keyword overrides are SI."""
    p = Scenario.defaults(ell)  # noqa: F405
    for key, value in overrides.items():
        if not hasattr(p, key):
            raise ValueError(f"unknown scenario field {key!r}")
        setattr(p, key, value)
    return Scenario.build(p)  # noqa: F405
