"""Kernel backend selection.

The compiled extension (debiaslab._ckernels) is preferred; the numpy
reference backend is the fallback. Override with the environment
variable DEBIASLAB_KERNELS=c|python|auto (default auto). The active
backend name is exported as BACKEND and recorded in run reports.
"""

import os

from debiaslab.kernels import reference

_choice = os.environ.get("DEBIASLAB_KERNELS", "auto")
if _choice not in ("auto", "c", "python"):
    raise RuntimeError(f"DEBIASLAB_KERNELS must be auto|c|python, got {_choice!r}")

if _choice == "python":
    _impl = reference
    BACKEND = "python"
else:
    try:
        from debiaslab import _ckernels as _impl

        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        _impl = reference
        BACKEND = "python"

softmax_rows = _impl.softmax_rows
layer_norm_rows = _impl.layer_norm_rows
layer_norm_backward_rows = _impl.layer_norm_backward_rows
cross_entropy_rows = _impl.cross_entropy_rows
adam_update = _impl.adam_update
gelu_rows = _impl.gelu_rows
gelu_backward_rows = _impl.gelu_backward_rows
