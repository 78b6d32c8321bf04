"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
contract-identical (results agree to float64 round-off, not bit-for-bit,
because summation order differs). Set RHEACL_KERNELS=numpy to force the
fallback, or RHEACL_KERNELS=compiled to fail loudly if the build is missing.
"""

from __future__ import annotations

import os

_requested = os.environ.get("RHEACL_KERNELS", "auto")

if _requested not in ("auto", "compiled", "numpy"):
    raise RuntimeError(f"RHEACL_KERNELS must be auto|compiled|numpy, got {_requested!r}")

if _requested == "numpy":
    from rheacl.tensor import _kernels_np as _impl

    BACKEND = "numpy"
else:
    try:
        from rheacl.tensor import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from rheacl.tensor import _kernels_np as _impl  # type: ignore[no-redef]

        BACKEND = "numpy"

conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool2_forward = _impl.maxpool2_forward
maxpool2_backward = _impl.maxpool2_backward
visibility_mask = _impl.visibility_mask
