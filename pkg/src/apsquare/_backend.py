"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``APSQUARE_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
band_accumulate = _fallback.band_accumulate
touching_maximal = _fallback.touching_maximal
ap_all_intervals = _fallback.ap_all_intervals

if os.environ.get("APSQUARE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _native
    except ImportError:
        pass
    else:
        BACKEND = "native"
        band_accumulate = _native.band_accumulate
        touching_maximal = _native.touching_maximal
        ap_all_intervals = _native.ap_all_intervals
