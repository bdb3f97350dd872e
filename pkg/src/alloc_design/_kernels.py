"""Enumeration kernels over two-binomial outcome tables.

Two interchangeable backends: loop kernels compiled with numba ``@njit``
and a vectorized numpy fallback. ``ALLOC_DESIGN_NUMBA=0`` (or a missing
numba install) selects numpy. Both backends are importable directly so
they can be compared against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("ALLOC_DESIGN_NUMBA", "1").strip().lower()
USE_NUMBA = numba is not None and _FLAG not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"


def _wald_power_loops(pmf_a, pmf_b, n_a, n_b, K, two_sided, sign):
    # returns (rejection mass, acceptance mass)
    reject = 0.0
    accept = 0.0
    K2 = K * K
    for ya in range(n_a + 1):
        pa = ya / n_a
        va = pa * (1.0 - pa) / n_a
        rej_row = 0.0
        acc_row = 0.0
        for yb in range(n_b + 1):
            pb = yb / n_b
            diff = pb - pa
            var = va + pb * (1.0 - pb) / n_b
            if var > 0.0:
                w = diff / math.sqrt(var)
            elif diff > 0.0:
                w = math.inf
            elif diff < 0.0:
                w = -math.inf
            else:
                w = 0.0
            if two_sided:
                hit = w * w > K2
            else:
                hit = sign * w > K
            if hit:
                rej_row += pmf_b[yb]
            else:
                acc_row += pmf_b[yb]
        reject += pmf_a[ya] * rej_row
        accept += pmf_a[ya] * acc_row
    return reject, accept


def _mtd_loops(pmf_a, pmf_b, n_a, n_b, c):
    # P(ya * n_b + yb * n_a >= c) and its complement, each summed directly
    tail = np.zeros(n_b + 2)
    head = np.zeros(n_b + 2)
    for yb in range(n_b, -1, -1):
        tail[yb] = tail[yb + 1] + pmf_b[yb]
    for yb in range(n_b + 1):
        head[yb + 1] = head[yb] + pmf_b[yb]
    hit = 0.0
    miss = 0.0
    for ya in range(n_a + 1):
        m = c - ya * n_b
        if m <= 0:
            lo = 0
        else:
            lo = (m + n_a - 1) // n_a
        if lo > n_b + 1:
            lo = n_b + 1
        hit += pmf_a[ya] * tail[lo]
        miss += pmf_a[ya] * head[lo]
    return hit, miss


def wald_power_numpy(pmf_a, pmf_b, n_a, n_b, K, two_sided, sign):
    pa = np.arange(n_a + 1) / n_a
    pb = np.arange(n_b + 1) / n_b
    va = pa * (1.0 - pa) / n_a
    vb = pb * (1.0 - pb) / n_b
    diff = pb[None, :] - pa[:, None]
    var = va[:, None] + vb[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = diff / np.sqrt(var)
    w[np.isnan(w)] = 0.0
    if two_sided:
        hit = w * w > K * K
    else:
        hit = sign * w > K
    rej_rows = np.where(hit, pmf_b[None, :], 0.0).sum(axis=1)
    acc_rows = np.where(hit, 0.0, pmf_b[None, :]).sum(axis=1)
    return float(pmf_a @ rej_rows), float(pmf_a @ acc_rows)


def mtd_numpy(pmf_a, pmf_b, n_a, n_b, c):
    tail = np.zeros(n_b + 2)
    tail[: n_b + 1] = np.cumsum(pmf_b[::-1])[::-1]
    head = np.zeros(n_b + 2)
    head[1:] = np.cumsum(pmf_b)
    m = c - np.arange(n_a + 1) * n_b
    lo = np.where(m <= 0, 0, -(-m // n_a))
    lo = np.minimum(lo, n_b + 1)
    return float(pmf_a @ tail[lo]), float(pmf_a @ head[lo])


if numba is not None:
    _jit = numba.njit(cache=True, nogil=True, error_model="numpy")
    wald_power_numba = _jit(_wald_power_loops)
    mtd_numba = _jit(_mtd_loops)
else:  # pragma: no cover
    wald_power_numba = None
    mtd_numba = None

if USE_NUMBA:
    def wald_power(pmf_a, pmf_b, n_a, n_b, K, two_sided, sign):
        return wald_power_numba(pmf_a, pmf_b, n_a, n_b, float(K), bool(two_sided), float(sign))

    def mtd_probability(pmf_a, pmf_b, n_a, n_b, c):
        return mtd_numba(pmf_a, pmf_b, n_a, n_b, int(c))
else:
    wald_power = wald_power_numpy
    mtd_probability = mtd_numpy


def wald_statistic_array(y_a, n_a, y_b, n_b):
    """Vectorized Wald statistic with the degenerate-variance convention."""
    pa = np.asarray(y_a, dtype=np.float64) / n_a
    pb = np.asarray(y_b, dtype=np.float64) / n_b
    var = pa * (1.0 - pa) / n_a + pb * (1.0 - pb) / n_b
    diff = pb - pa
    with np.errstate(divide="ignore", invalid="ignore"):
        w = diff / np.sqrt(var)
    return np.where(np.isnan(w), 0.0, w)


def thread_cap() -> int:
    """Worker count from ``ALLOC_DESIGN_THREADS`` (default: CPU count)."""
    raw = os.environ.get("ALLOC_DESIGN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
