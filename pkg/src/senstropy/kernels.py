"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module.  Setting ``SENSTROPY_PURE_PYTHON=1`` forces
the fallback.  Both backends produce identical results.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("SENSTROPY_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
cumulative_log_markov = _impl.cumulative_log_markov
pivot = _impl.pivot
ratio_test = _impl.ratio_test

# bitmask states are 64-bit in the compiled kernel
MAX_COMPILED_STATES = 62


def scan_branch(succ_by_label, label_mask, states, coords):
    if _impl is not _pykernels and len(label_mask) > MAX_COMPILED_STATES:
        return _pykernels.scan_branch(succ_by_label, label_mask, states, coords)
    return _impl.scan_branch(succ_by_label, label_mask, states, coords)
