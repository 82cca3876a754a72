"""Integration kernel with a compiled core and a pure-Python fallback.

The backend is picked at import time: the Cython extension when available,
else the pure-Python twin. Override with PLDISK_KERNEL=c|python|auto.
"""

from __future__ import annotations

import os

from . import common
from .common import *  # noqa: F401,F403 - re-export field/status/cfg constants

_choice = os.environ.get("PLDISK_KERNEL", "auto").lower()

if _choice not in ("auto", "c", "python"):
    raise RuntimeError(f"PLDISK_KERNEL must be auto|c|python, got {_choice!r}")

if _choice == "python":
    from . import rk_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _rk as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        from . import rk_py as _impl

        BACKEND = "python"

integrate_raw = _impl.integrate_raw


def available_backends():
    """Importable kernel backends, name -> integrate_raw callable."""
    out = {}
    try:
        from . import _rk

        out["c"] = _rk.integrate_raw
    except ImportError:
        pass
    from . import rk_py

    out["python"] = rk_py.integrate_raw
    return out
