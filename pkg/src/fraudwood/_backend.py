"""Kernel backend selection.

The compiled extension is used when importable; set ``FRAUDWOOD_PURE=1``
to force the numpy fallback.  Both produce identical trees.
"""

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

ops = _pykernels
name = "python"
if _ckernels is not None and os.environ.get("FRAUDWOOD_PURE", "") in ("", "0"):
    ops, name = _ckernels, "cython"


def available() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


def set_backend(which: str) -> None:
    global ops, name
    if which == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        ops, name = _ckernels, "cython"
    elif which == "python":
        ops, name = _pykernels, "python"
    else:
        raise ValueError(f"unknown backend {which!r}")


@contextmanager
def using(which: str):
    prev = name
    set_backend(which)
    try:
        yield
    finally:
        set_backend(prev)
