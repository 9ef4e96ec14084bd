"""Backend selection for the hot model-evaluation kernel.

The kernel evaluates the 34-parameter device-and-channel model used by the
uncalibrated key-rate minimisation. Parameter-vector layout:

    x[0]      channel lambda1
    x[1]      channel lambda2
    x[2:10]   preparation direction angles (polar, azimuth) for X+, X-, Y+, Y-
              (the key-basis preparations are pinned to the poles)
    x[10:22]  measurement direction angles, all six detectors
    x[22:28]  preparation efficiencies
    x[28:34]  detector efficiencies

model_constraints(x) returns 23 values: the 9 model correlators (row-major
over preparation and detection bases), 6 preparation probabilities, 6
detection probabilities, and the two channel-positivity margins
1 + l1 -+ 2*l2. penalty_value(x, lo, hi, w) fuses the objective (usable
entropy of the channel parameters) with the weighted squared interval
violations; it is what the inner optimiser loop calls.

The compiled extension is used when importable and not disabled through the
RFIQKD_PURE_PYTHON environment variable; otherwise the numpy fallback in
_kernel_py serves the same interface.
"""

from __future__ import annotations

import os

if os.environ.get("RFIQKD_PURE_PYTHON"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl

BACKEND: str = _impl.BACKEND
N_PARAMS: int = _impl.N_PARAMS
N_CONSTRAINTS: int = _impl.N_CONSTRAINTS

model_constraints = _impl.model_constraints
penalty_value = _impl.penalty_value
usable_entropy_raw = _impl.usable_entropy_raw

__all__ = [
    "BACKEND",
    "N_PARAMS",
    "N_CONSTRAINTS",
    "model_constraints",
    "penalty_value",
    "usable_entropy_raw",
]
