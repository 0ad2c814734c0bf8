"""Selects the state-expansion kernel: compiled when available, else pure Python.

Set MORSECENSUS_PURE=1 to force the fallback.
"""

import os

from .flips import expand_key as py_expand_key

compiled_expand_key = None
if not os.environ.get("MORSECENSUS_PURE"):
    try:
        from ._ckernel import expand_key as compiled_expand_key
    except ImportError:  # extension not built
        compiled_expand_key = None

expand_key = compiled_expand_key or py_expand_key
BACKEND = "compiled" if compiled_expand_key else "python"
