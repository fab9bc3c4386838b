"""Numeric kernels for diagonal-Gaussian mixture evidence computations.

Two interchangeable backends exist: a compiled Cython module and a pure
numpy implementation. The compiled one is preferred when it imported
cleanly; ``WOEBOX_KERNEL=python`` (or ``=cython``) forces a choice.
Both expose the same functions and must agree to float precision
(``tests/test_kernels.py`` enforces this).
"""

import os

from . import _gnb_py

_forced = os.environ.get("WOEBOX_KERNEL", "").strip().lower()

if _forced == "python":
    _impl = _gnb_py
    BACKEND = "python"
else:
    try:
        from . import _gnb_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _gnb_py
        BACKEND = "python"

log_density_table = _impl.log_density_table
per_feature_woe = _impl.per_feature_woe


def available_backends():
    """Name -> module for every importable backend (benchmarks, tests)."""
    out = {"python": _gnb_py}
    try:
        from . import _gnb_cy

        out["cython"] = _gnb_cy
    except ImportError:
        pass
    return out
