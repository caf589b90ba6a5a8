"""Simulator for non-line-of-sight radar imaging through a modular passive skin."""

import numba as _numba

__version__ = "0.1.0"

# the bundled TBB is too old for numba; OpenMP avoids the runtime warning
if _numba.config.THREADING_LAYER == "default":
    _numba.config.THREADING_LAYER = "omp"


def set_threads(n: int | None) -> None:
    """Bound the worker threads of the compiled kernels (``None`` keeps the default)."""
    if n is not None:
        _numba.set_num_threads(max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS)))
