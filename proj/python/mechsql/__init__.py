"""Quantum-jump detection in membrane-in-the-middle optomechanics."""

from ._core import *  # noqa: F401,F403
from ._core import __version__


def table(records):
    """Column-oriented view of a list of row dicts."""
    if not records:
        return {}
    return {k: [r[k] for r in records] for k in records[0]}
