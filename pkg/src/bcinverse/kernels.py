"""Backend selection for the hot loops.

The compiled extension ``_kernels`` is used when it imports; otherwise, or
when ``BCINVERSE_PURE_PYTHON=1`` is set, the NumPy fallback is used.
"""

import os

from . import _kernels_py as python_kernels

compiled_kernels = None
if os.environ.get("BCINVERSE_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

_impl = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"

goursat_march = _impl.goursat_march
goursat_rows = _impl.goursat_rows
char_rect_march = _impl.char_rect_march
prufer_sweep = _impl.prufer_sweep
cp_propagate = _impl.cp_propagate
wave_leapfrog = _impl.wave_leapfrog

# small helpers are always taken from the NumPy module
transfer_cs = python_kernels.transfer_cs
cell_square_integrals = python_kernels.cell_square_integrals
