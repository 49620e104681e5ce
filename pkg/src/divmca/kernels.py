"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
fallback.  Set ``DIVMCA_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("DIVMCA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build environment
        _impl = _fallback

gs_sweep = _impl.gs_sweep
bellman_all = _impl.bellman_all
simulate_paths = _impl.simulate_paths

SINGULAR = _fallback.SINGULAR
REGULAR = _fallback.REGULAR
REFLECT = _fallback.REFLECT
