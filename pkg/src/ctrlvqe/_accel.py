"""Backend selection for the hot propagation/gradient kernels.

CTRLVQE_BACKEND=numba|numpy picks the implementation explicitly; the
default is numba when importable, falling back to the pure-numpy twin.
Both expose the same function signatures (see _kernels_numpy for the
reference semantics).
"""
import os


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
        return True
    except ImportError:
        return False


_requested = os.environ.get("CTRLVQE_BACKEND", "").strip().lower()

if _requested == "numpy":
    BACKEND = "numpy"
elif _requested == "numba":
    BACKEND = "numba"
elif _requested in ("", "auto"):
    BACKEND = "numba" if _numba_available() else "numpy"
else:
    raise RuntimeError(f"CTRLVQE_BACKEND={_requested!r} not one of numba|numpy|auto")

if BACKEND == "numba":
    from . import _kernels_numba as kernels
else:
    from . import _kernels_numpy as kernels

__all__ = ["BACKEND", "kernels"]
