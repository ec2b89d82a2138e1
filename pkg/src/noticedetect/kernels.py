"""Select the compiled marker-matching kernel, or the pure-Python fallback.

Set ``NOTICES_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

IMPLEMENTATION = "python"

if os.environ.get("NOTICES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        IMPLEMENTATION = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

match_prefix = _impl.match_prefix
match_postfix = _impl.match_postfix
scan_titles = _impl.scan_titles

__all__ = ["IMPLEMENTATION", "match_prefix", "match_postfix", "scan_titles"]
