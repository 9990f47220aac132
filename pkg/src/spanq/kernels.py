"""Backend selection for the phase-estimation kernels.

The compiled extension ``spanq._fejer`` is used when it imports; otherwise
the numpy fallback. Set ``SPANQ_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fejer_py

BACKEND = "python"
if os.environ.get("SPANQ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _fejer as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fejer_py
else:
    _impl = _fejer_py

fejer = _impl.fejer
fejer_power = _impl.fejer_power
leak_bound = _impl.leak_bound
one_copy_amplitudes = _impl.one_copy_amplitudes

__all__ = ["BACKEND", "fejer", "fejer_power", "leak_bound", "one_copy_amplitudes"]
