"""Protocol-loop backends.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy fallback runs.  Both produce bit-identical counts and sums, so backend
choice never changes results.  Set BELLSIM_BACKEND=python to force the
fallback (any other value is rejected to avoid silently ignored typos).
"""

import os

from . import pyloop
from ..core import BellsimError

_requested = os.environ.get("BELLSIM_BACKEND", "").strip().lower()
if _requested in ("", "auto"):
    try:
        from . import cyloop as _impl
    except ImportError:
        _impl = pyloop
elif _requested == "python":
    _impl = pyloop
elif _requested == "cython":
    from . import cyloop as _impl
else:
    raise BellsimError(f"BELLSIM_BACKEND={_requested!r} (use 'python' or 'cython')")

run_chunk = _impl.run_chunk
backend_name: str = _impl.name
