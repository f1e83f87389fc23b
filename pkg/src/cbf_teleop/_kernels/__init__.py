"""Numeric kernels for the per-tick hot path, with two interchangeable backends.

The compiled extension (``_core``, Cython) and the pure-Python module
(``fallback``) implement the same five functions with identical IEEE-754
operation order, so switching backends never changes a single bit of any
result; a parity test suite holds them to that.  The compiled backend is
preferred when the extension built; set ``CBF_TELEOP_KERNELS=py`` or
``=c`` to force one (forcing ``c`` without the extension is an import
error rather than a silent fallback).

Backend functions:

- ``qp_project``: exact active-set projection onto half-planes.
- ``qp_oracle``: nearest feasible grid point, expanding-ring search.
- ``ecbf_rows``: barrier constraint rows for every obstacle.
- ``contact_min``: minimum barrier / surface clearance over obstacles.
- ``safety_filter``: fused cull + project + verify for one control tick.
"""

from __future__ import annotations

import os

_choice = os.environ.get("CBF_TELEOP_KERNELS", "").strip().lower()

if _choice not in ("", "c", "py"):
    raise ImportError(
        f"CBF_TELEOP_KERNELS must be 'c' or 'py', got {_choice!r}"
    )

if _choice == "py":
    from . import fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "c":
            raise ImportError(
                "CBF_TELEOP_KERNELS=c but the compiled extension is not "
                "available; rebuild the package or unset the variable"
            )
        from . import fallback as _impl

        BACKEND = "python"

FAR = _impl.FAR
qp_project = _impl.qp_project
qp_oracle = _impl.qp_oracle
ecbf_rows = _impl.ecbf_rows
contact_min = _impl.contact_min
safety_filter = _impl.safety_filter

__all__ = [
    "BACKEND",
    "FAR",
    "qp_project",
    "qp_oracle",
    "ecbf_rows",
    "contact_min",
    "safety_filter",
]
