"""Switch between numba-compiled loops and their pure numpy counterparts.

Set ``LAG2CH_NO_JIT=1`` to force the numpy path (useful for debugging and
for the benchmark). ``LAG2CH_THREADS`` caps the numba thread pool.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("LAG2CH_NO_JIT", "").strip().lower()

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

if nb is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # the default probe warns about an outdated TBB on some systems
    nb.config.THREADING_LAYER = "workqueue"

JIT_ENABLED = nb is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if nb is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return nb.njit(*args, **kwargs)


def set_threads(count: int | None) -> None:
    """Limit numba's worker threads; silently ignored without numba."""
    if nb is None or count is None:
        return
    count = max(1, min(int(count), nb.config.NUMBA_NUM_THREADS))
    nb.set_num_threads(count)


def use_jit(flag: bool | None = None) -> bool:
    """Resolve a per-call override against the process-wide default."""
    return JIT_ENABLED if flag is None else (bool(flag) and nb is not None)


if os.environ.get("LAG2CH_THREADS", "").isdigit():
    set_threads(int(os.environ["LAG2CH_THREADS"]))
