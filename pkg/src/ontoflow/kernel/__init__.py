"""Evaluation kernel selection.

Two interchangeable backends execute compiled condition programs: the
Cython extension (built at install time) and a pure-Python fallback. The
default is chosen at import: the compiled kernel when present, otherwise
Python. Override per process with ONTOFLOW_KERNEL=c|py|auto or per engine
via the ``kernel=`` argument.
"""

from __future__ import annotations

import os

from . import pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built; pure Python carries on
    _ckernel = None


def available_backends() -> list[str]:
    return ["py"] + (["c"] if _ckernel is not None else [])


def resolve_backend(name: str | None = None) -> str:
    name = (name or os.environ.get("ONTOFLOW_KERNEL") or "auto").lower()
    if name == "auto":
        return "c" if _ckernel is not None else "py"
    if name == "c":
        if _ckernel is None:
            raise RuntimeError("compiled kernel requested but not built")
        return "c"
    if name == "py":
        return "py"
    raise ValueError(f"unknown kernel backend {name!r} (expected c, py, or auto)")


def get_kernel(name: str | None = None):
    """(backend name, eval_program callable) for the requested backend."""
    backend = resolve_backend(name)
    module = _ckernel if backend == "c" else pykernel
    return backend, module.eval_program
