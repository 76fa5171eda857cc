"""Collision-tally backend selection.

The compiled tally is used when it imports; setting ``COLLNORM_PURE_PYTHON=1``
forces the numpy implementation. Both expose the same ``Tally`` class.
"""

from __future__ import annotations

import os

from . import _pytally

PyTally = _pytally.Tally

try:
    from ._ctally import Tally as CTally
except ImportError:  # pragma: no cover - depends on build
    CTally = None

if CTally is not None and os.environ.get("COLLNORM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    Tally = CTally
    BACKEND = "compiled"
else:
    Tally = PyTally
    BACKEND = "python"

__all__ = ["Tally", "PyTally", "CTally", "BACKEND"]
