"""Selects the compiled kernel when it imports, else the pure-Python paths.

Set ``BINSTRETCH_BACKEND=python`` to force the fallback everywhere.
"""
from __future__ import annotations

import os
from functools import lru_cache

try:
    from . import _kernel
except ImportError:  # not built: pure-Python fallback
    _kernel = None

COMPILED = _kernel is not None and os.environ.get("BINSTRETCH_BACKEND", "auto") != "python"


def use_compiled(backend: str = "auto") -> bool:
    if backend == "python":
        return False
    if backend == "compiled":
        if _kernel is None:
            raise RuntimeError("compiled kernel is not built; reinstall with Cython available")
        return True
    if backend != "auto":
        raise ValueError(f"unknown backend {backend!r}")
    return COMPILED


def name() -> str:
    return "compiled" if COMPILED else "python"


@lru_cache(maxsize=16)
def feasibility_kernel(bins: int, opt: int):
    return _kernel.FeasibilityKernel(bins, opt)
