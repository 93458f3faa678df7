"""Kernel backend selection.

The compiled extension (``_fast``) is preferred; the pure-Python reference
(``pyref``) is the fallback.  Set ``ADSAT_PURE_PYTHON=1`` to force the
fallback, e.g. for the backend benchmark or debugging.
"""
import os

if os.environ.get("ADSAT_PURE_PYTHON"):
    from . import pyref as impl
else:
    try:
        from . import _fast as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyref as impl

BACKEND = impl.BACKEND_NAME


def get_impl(name=None):
    """Return a kernel module by name ('cython', 'python', or None=active)."""
    if name is None:
        return impl
    if name == "python":
        from . import pyref
        return pyref
    if name == "cython":
        from . import _fast  # type: ignore[attr-defined]
        return _fast
    raise ValueError(f"unknown backend {name!r}")
