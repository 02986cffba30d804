# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Sturm pivot counting and tridiagonal inverse diagonals.

Both routines are sequential recurrences over the matrix dimension and
dominate the runtime of spectrum slicing and Green's-function scans, which
is why they live in an extension module.  `gapcount.kernels._pykernels`
provides the same interface in pure Python.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "cython"


def count_below(const double[::1] diag, const double[::1] off,
                const double[::1] shifts,
                double pivmin):
    """Count eigenvalues below each shift for a symmetric tridiagonal matrix.

    Runs the LDL^T pivot recurrence d_i = (t_ii - s) - off_{i-1}^2 / d_{i-1}
    and counts negative pivots.  Pivots smaller than ``pivmin`` in magnitude
    are replaced by ``-pivmin`` (the standard Sturm-count safeguard); the
    returned flag marks shifts where that substitution fired.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t ns = shifts.shape[0]
    if off.shape[0] != n - 1:
        raise ValueError("off-diagonal length must be n - 1")
    counts = np.zeros(ns, dtype=np.int64)
    hit = np.zeros(ns, dtype=np.uint8)
    cdef long long[::1] cv = counts
    cdef unsigned char[::1] hv = hit
    cdef Py_ssize_t i, k
    cdef double d, s
    cdef long long c
    cdef unsigned char h
    for k in range(ns):
        s = shifts[k]
        c = 0
        h = 0
        d = diag[0] - s
        if d > -pivmin and d < pivmin:
            d = -pivmin
            h = 1
        if d < 0.0:
            c += 1
        for i in range(1, n):
            d = (diag[i] - s) - off[i - 1] * off[i - 1] / d
            if d > -pivmin and d < pivmin:
                d = -pivmin
                h = 1
            if d < 0.0:
                c += 1
        cv[k] = c
        hv[k] = h
    return counts, hit


def resolvent_diagonal(const double[::1] diag, const double[::1] off,
                       double pivmin):
    """Diagonal of the inverse of a symmetric tridiagonal matrix.

    Uses the two continued-fraction sweeps
    f_i = 1/(t_ii - off_{i-1}^2 f_{i-1}) and g_i = 1/(t_ii - off_i^2 g_{i+1});
    then (T^{-1})_{ii} = 1/(t_ii - off_{i-1}^2 f_{i-1} - off_i^2 g_{i+1}).
    Denominators are floored at ``pivmin`` in magnitude.
    """
    cdef Py_ssize_t n = diag.shape[0]
    if off.shape[0] != n - 1:
        raise ValueError("off-diagonal length must be n - 1")
    f = np.empty(n, dtype=np.float64)
    g = np.empty(n, dtype=np.float64)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] fv = f
    cdef double[::1] gv = g
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double den
    den = diag[0]
    if den > -pivmin and den < pivmin:
        den = -pivmin if den < 0.0 else pivmin
    fv[0] = 1.0 / den
    for i in range(1, n):
        den = diag[i] - off[i - 1] * off[i - 1] * fv[i - 1]
        if den > -pivmin and den < pivmin:
            den = -pivmin if den < 0.0 else pivmin
        fv[i] = 1.0 / den
    den = diag[n - 1]
    if den > -pivmin and den < pivmin:
        den = -pivmin if den < 0.0 else pivmin
    gv[n - 1] = 1.0 / den
    for i in range(n - 2, -1, -1):
        den = diag[i] - off[i] * off[i] * gv[i + 1]
        if den > -pivmin and den < pivmin:
            den = -pivmin if den < 0.0 else pivmin
        gv[i] = 1.0 / den
    for i in range(n):
        den = diag[i]
        if i > 0:
            den -= off[i - 1] * off[i - 1] * fv[i - 1]
        if i < n - 1:
            den -= off[i] * off[i] * gv[i + 1]
        if den > -pivmin and den < pivmin:
            den = -pivmin if den < 0.0 else pivmin
        ov[i] = 1.0 / den
    return out
