"""Pure-Python fallback for the compiled kernels.

Same contracts as ``_ckernels``.  ``count_below`` vectorizes over the shift
array so batched spectrum slicing stays usable without the extension; the
recurrence over matrix rows is inherently sequential.
"""

import numpy as np

IMPLEMENTATION = "python"


def count_below(diag, off, shifts, pivmin):
    diag = np.asarray(diag, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    shifts = np.asarray(shifts, dtype=np.float64)
    n = diag.shape[0]
    if off.shape[0] != n - 1:
        raise ValueError("off-diagonal length must be n - 1")
    off2 = off * off
    d = diag[0] - shifts
    hit = np.abs(d) < pivmin
    d = np.where(hit, -pivmin, d)
    counts = (d < 0.0).astype(np.int64)
    for i in range(1, n):
        d = (diag[i] - shifts) - off2[i - 1] / d
        small = np.abs(d) < pivmin
        hit |= small
        d = np.where(small, -pivmin, d)
        counts += d < 0.0
    return counts, hit.astype(np.uint8)


def _floor(den, pivmin):
    if abs(den) < pivmin:
        return -pivmin if den < 0.0 else pivmin
    return den


def resolvent_diagonal(diag, off, pivmin):
    diag = np.asarray(diag, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    n = diag.shape[0]
    if off.shape[0] != n - 1:
        raise ValueError("off-diagonal length must be n - 1")
    off2 = off * off
    f = np.empty(n)
    g = np.empty(n)
    f[0] = 1.0 / _floor(diag[0], pivmin)
    for i in range(1, n):
        f[i] = 1.0 / _floor(diag[i] - off2[i - 1] * f[i - 1], pivmin)
    g[n - 1] = 1.0 / _floor(diag[n - 1], pivmin)
    for i in range(n - 2, -1, -1):
        g[i] = 1.0 / _floor(diag[i] - off2[i] * g[i + 1], pivmin)
    out = np.empty(n)
    for i in range(n):
        den = diag[i]
        if i > 0:
            den -= off2[i - 1] * f[i - 1]
        if i < n - 1:
            den -= off2[i] * g[i + 1]
        out[i] = 1.0 / _floor(den, pivmin)
    return out
