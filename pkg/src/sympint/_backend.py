"""Backend selection for the long-run kernels.

Prefers the compiled extension when it imported cleanly; falls back to the
pure-Python twin otherwise. Set SYMPINT_PURE_PYTHON=1 to force the fallback
(useful for benchmarking and debugging).
"""

import os

_forced = os.environ.get("SYMPINT_PURE_PYTHON", "") not in ("", "0")

if _forced:
    from . import _loops_py as _impl
    COMPILED = False
else:
    try:
        from . import _fastloops as _impl  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        from . import _loops_py as _impl
        COMPILED = False

run_1d = _impl.run_1d


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
