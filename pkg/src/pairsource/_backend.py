"""Kernel selection.

The compiled GMP core is used when it imports; otherwise the pure-Python
kernels. Setting ``PAIRSOURCE_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as pure

compiled = None
if not os.environ.get("PAIRSOURCE_PURE"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
NAME = "compiled" if compiled is not None else "pure"


def use(name: str) -> None:
    """Switch the active kernels at runtime ("compiled" or "pure")."""
    global kernels, NAME
    if name == "pure":
        kernels, NAME = pure, "pure"
    elif name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        kernels, NAME = compiled, "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")
