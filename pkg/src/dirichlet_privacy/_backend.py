"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the
pure-Python twin is the fallback.  Set ``DIRICHLET_PRIVACY_PURE=1`` to force
the fallback (used by the benchmark and by CI to exercise both paths).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("DIRICHLET_PRIVACY_PURE", "").strip() not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels_c as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND: str = kernels.BACKEND

ln_gamma = kernels.ln_gamma
digamma = kernels.digamma
ln_beta = kernels.ln_beta
reg_inc_beta = kernels.reg_inc_beta
dirichlet_tail = kernels.dirichlet_tail


def available_backends():
    """Name/module pairs for every importable kernel backend."""
    out = [("python", _kernels_py)]
    try:
        from . import _kernels_c
    except ImportError:
        pass
    else:
        out.insert(0, ("compiled", _kernels_c))
    return out
