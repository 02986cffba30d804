"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
fallback.  Set ``GAPCOUNT_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by tests that compare the two backends).
"""

import os

if os.environ.get("GAPCOUNT_PURE_PYTHON"):
    from . import _pykernels as _backend
else:
    try:
        from . import _ckernels as _backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _backend

IMPLEMENTATION = _backend.IMPLEMENTATION
count_below = _backend.count_below
resolvent_diagonal = _backend.resolvent_diagonal

__all__ = ["IMPLEMENTATION", "count_below", "resolvent_diagonal"]
