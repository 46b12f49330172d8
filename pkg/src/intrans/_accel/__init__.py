"""Kernel selection: compiled extension if available, numpy fallback otherwise.

Set INTRANS_PURE_PYTHON=1 to force the fallback (useful for benchmarking
and for testing implementation parity). The active implementation is
reported by ACTIVE_IMPL ("compiled" or "python"); both produce identical
outputs by construction, so the choice only affects speed.
"""

import os

from . import _purepy

if os.environ.get("INTRANS_PURE_PYTHON"):
    _impl = _purepy
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _purepy

ACTIVE_IMPL = _impl.IMPL

pair_counts = _impl.pair_counts
mcmc_pair_transfer = _impl.mcmc_pair_transfer
profile_margins = _impl.profile_margins

# The pure versions stay importable for parity tests and benchmarks.
pure = _purepy
