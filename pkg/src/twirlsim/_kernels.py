"""Shot-tally kernels: numba when available, plain numpy otherwise.

Set ``TWIRLSIM_DISABLE_NUMBA=1`` to force the numpy path.  Both paths map a
block of uniforms onto outcome counts with the same comparison rule
(outcome ``k`` is the first index with ``u < cdf[k]``), so counts agree
exactly and results do not depend on the backend.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("TWIRLSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by TWIRLSIM_DISABLE_NUMBA")
    from numba import njit
except ImportError:
    njit = None


def tally_numpy(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, len(cdf) - 1, out=idx)
    return np.bincount(idx, minlength=len(cdf)).astype(np.int64)


def _tally_loop(u, cdf):
    n = cdf.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for i in range(u.shape[0]):
        x = u[i]
        lo = 0
        hi = n - 1
        # first k with x < cdf[k]; the last outcome absorbs rounding slack
        while lo < hi:
            mid = (lo + hi) // 2
            if x < cdf[mid]:
                hi = mid
            else:
                lo = mid + 1
        counts[lo] += 1
    return counts


if njit is not None:
    tally_numba = njit(nogil=True, cache=True)(_tally_loop)
    BACKEND = "numba"
    tally_outcomes = tally_numba
else:
    tally_numba = None
    BACKEND = "numpy"
    tally_outcomes = tally_numpy
