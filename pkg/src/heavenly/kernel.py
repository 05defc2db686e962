"""Kernel selection: the compiled extension when built, else pure Python.

Set ``HEAVENLY_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("HEAVENLY_PURE_PYTHON"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        from . import _kernel_py as _impl

BACKEND = "compiled" if _impl.__name__.endswith("._kernel") else "python"

add = _impl.add
sub = _impl.sub
neg = _impl.neg
scale = _impl.scale
mul = _impl.mul
mul_term = _impl.mul_term
diff = _impl.diff
div_exact = _impl.div_exact
mono_min = _impl.mono_min

SLOT_BITS = 16
SLOT_MASK = (1 << SLOT_BITS) - 1
