"""Backend selection for the hot kernels.

The compiled extension is preferred.  Set ``SWPCLOCK_PURE_PYTHON=1`` to
force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
transfer_amplitudes = _kernels_py.transfer_amplitudes
cn_propagate = _kernels_py.cn_propagate

if os.environ.get("SWPCLOCK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        transfer_amplitudes = _kernels.transfer_amplitudes
        cn_propagate = _kernels.cn_propagate

__all__ = ["BACKEND", "transfer_amplitudes", "cn_propagate"]
