"""Select the compiled sweep kernel when available, else the numpy fallback.

Set ``COULOMB2D_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pgs_py

BACKEND = "python"
pgs_box = _pgs_py.pgs_box
box_residual = _pgs_py.box_residual

if os.environ.get("COULOMB2D_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _pgs  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        BACKEND = "cython"
        pgs_box = _pgs.pgs_box
        box_residual = _pgs.box_residual

BACKENDS = {"python": (_pgs_py.pgs_box, _pgs_py.box_residual)}
if BACKEND == "cython":
    BACKENDS["cython"] = (pgs_box, box_residual)
