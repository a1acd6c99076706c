"""Backend selection for the numeric kernels.

Kernels exist twice: numba-compiled scalar loops (``numba`` backend) and
vectorised numpy code (``numpy`` backend).  The default is ``numba`` when it
imports cleanly, unless ``DIRWALK_NO_NUMBA`` is set to a truthy value.
"""

from __future__ import annotations

import contextlib
import os
import warnings

warnings.filterwarnings("ignore", message="The TBB threading layer requires")

ENV_FLAG = "DIRWALK_NO_NUMBA"

BACKENDS = ("numba", "numpy")


def _numba_importable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


HAVE_NUMBA = _numba_importable()

_current = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def backend() -> str:
    return _current


def set_backend(name: str) -> None:
    global _current
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _current = name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch backend, e.g. for cross-checking the two paths."""
    previous = _current
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def set_threads(n: int | None) -> int:
    """Cap numba's worker pool; returns the number of threads in use.

    Results never depend on this value since every replicate owns its stream.
    """
    if not HAVE_NUMBA:
        return 1
    import numba

    available = numba.config.NUMBA_NUM_THREADS
    if n is None:
        return numba.get_num_threads()
    n = max(1, min(int(n), available))
    numba.set_num_threads(n)
    return n
