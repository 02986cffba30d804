"""Eigenvalue counting by Sylvester inertia.

Tridiagonal matrices are counted with the safeguarded Sturm pivot
recurrence (see ``gapcount.kernels``); eigenvalues are extracted by
bisection on those counts.  Dense symmetric matrices get an LDL^T-based
count and a full-eigendecomposition threshold count.

Intervals are open.  An eigenvalue within ``tol`` of an endpoint sets the
corresponding boundary flag and the caller decides how to treat it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .operators import TruncatedMatrix

__all__ = [
    "CountResult",
    "count_below",
    "count_in_interval",
    "eigs_in_interval",
    "smallest_eigenvalue",
    "dense_count_ge",
    "dense_count_below",
    "dense_count_in_interval",
]

TOL_FACTOR = 1e-10       # default tol = TOL_FACTOR * max(1, ||T||)
_PIVMIN_FACTOR = 1e-280  # pivots below this (times scale) count as breakdown
_MAX_BISECT_LEVELS = 256


@dataclass(frozen=True)
class CountResult:
    interval: tuple
    count: int
    boundary_flags: tuple  # (eigenvalue within tol of lower/upper endpoint)


def _as_tridiag(t):
    if isinstance(t, TruncatedMatrix):
        return t.diag, t.offdiag
    diag, off = t
    return np.ascontiguousarray(diag, dtype=float), np.ascontiguousarray(
        off, dtype=float
    )


def _scale(diag, off):
    r = np.zeros_like(diag)
    if off.size:
        r[:-1] += np.abs(off)
        r[1:] += np.abs(off)
    return float(np.max(np.abs(diag) + r)) if diag.size else 0.0


def _default_tol(diag, off, tol):
    if tol is not None:
        if tol <= 0.0:
            raise ValueError("tol must be > 0")
        return float(tol)
    return TOL_FACTOR * max(1.0, _scale(diag, off))


def _counts(diag, off, shifts):
    pivmin = _PIVMIN_FACTOR * max(1.0, _scale(diag, off))
    shifts = np.ascontiguousarray(shifts, dtype=float)
    counts, hit = kernels.count_below(diag, off, shifts, pivmin)
    return counts, hit.astype(bool)


def count_below(t, shift):
    """Number of eigenvalues strictly below ``shift`` (safeguarded Sturm count)."""
    diag, off = _as_tridiag(t)
    counts, _ = _counts(diag, off, np.array([float(shift)]))
    return int(counts[0])


def count_in_interval(t, interval, tol=None) -> CountResult:
    """Count eigenvalues in the open interval (alpha, beta).

    On an exact pivot breakdown at an endpoint the count there is retried
    with the shift pulled inward by ``tol``; either way, endpoint proximity
    within ``tol`` is reported through ``boundary_flags``.
    """
    diag, off = _as_tridiag(t)
    alpha, beta = float(interval[0]), float(interval[1])
    if not alpha < beta:
        raise ValueError("interval must satisfy alpha < beta")
    tol = _default_tol(diag, off, tol)
    shifts = np.array(
        [alpha, beta, alpha - tol, alpha + tol, beta - tol, beta + tol]
    )
    counts, hit = _counts(diag, off, shifts)
    c_a, c_b = counts[0], counts[1]
    if hit[0]:
        c_a = counts[3]  # alpha + tol
    if hit[1]:
        c_b = counts[4]  # beta - tol
    flag_lo = bool(counts[3] - counts[2] > 0 or hit[0])
    flag_hi = bool(counts[5] - counts[4] > 0 or hit[1])
    return CountResult((alpha, beta), int(max(c_b - c_a, 0)), (flag_lo, flag_hi))


def eigs_in_interval(t, interval, tol=None):
    """Eigenvalues in the open interval, each located to within ``tol``.

    Bisection on inertia counts; returned values carry multiplicity, so the
    list length equals ``count_in_interval(...).count``.
    """
    diag, off = _as_tridiag(t)
    alpha, beta = float(interval[0]), float(interval[1])
    if not alpha < beta:
        raise ValueError("interval must satisfy alpha < beta")
    tol = _default_tol(diag, off, tol)
    res = count_in_interval((diag, off), (alpha, beta), tol)
    m = res.count
    if m == 0:
        return np.zeros(0)
    # anchor the slice indices consistently with the interval count
    counts, hit = _counts(diag, off, np.array([alpha]))
    c_a = int(counts[0])
    if hit[0]:
        c_a, _ = _counts(diag, off, np.array([alpha + tol]))
        c_a = int(c_a[0])
    work = [(alpha, beta, c_a, c_a + m)]
    out = []
    for _ in range(_MAX_BISECT_LEVELS):
        if not work:
            break
        mids = np.array([0.5 * (lo + hi) for lo, hi, _, _ in work])
        mcounts, _ = _counts(diag, off, mids)
        nxt = []
        for (lo, hi, k_lo, k_hi), mid, k_mid in zip(work, mids, mcounts):
            k_mid = int(np.clip(k_mid, k_lo, k_hi))
            for a, b, ka, kb in ((lo, mid, k_lo, k_mid), (mid, hi, k_mid, k_hi)):
                if kb - ka == 0:
                    continue
                if b - a <= 2.0 * tol:
                    out.extend([0.5 * (a + b)] * (kb - ka))
                else:
                    nxt.append((a, b, ka, kb))
        work = nxt
    if work:
        for lo, hi, k_lo, k_hi in work:
            out.extend([0.5 * (lo + hi)] * (k_hi - k_lo))
    return np.sort(np.asarray(out))


def smallest_eigenvalue(t, tol=None):
    """Bottom of the spectrum located by bisection on inertia counts."""
    diag, off = _as_tridiag(t)
    tol = _default_tol(diag, off, tol)
    r = np.zeros_like(diag)
    if off.size:
        r[:-1] += np.abs(off)
        r[1:] += np.abs(off)
    lo = float(np.min(diag - r)) - tol
    hi = float(np.max(diag + r)) + tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c, _ = _counts(diag, off, np.array([mid]))
        if c[0] >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _check_symmetric(s, rtol=1e-12):
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("expected a square matrix")
    scale = np.linalg.norm(s)
    if scale > 0.0 and np.linalg.norm(s - s.T) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (s + s.T)


def dense_count_ge(s, threshold):
    """Number of eigenvalues >= threshold via full symmetric eigendecomposition."""
    s = _check_symmetric(s)
    if s.shape[0] == 0:
        return 0
    w = np.linalg.eigvalsh(s)
    return int(np.sum(w >= threshold))


def _dense_count_below_flagged(s, shift):
    n = s.shape[0]
    if n == 0:
        return 0, False
    tiny = _PIVMIN_FACTOR * max(1.0, float(np.max(np.abs(s))) + abs(shift))
    _, d, _ = sla.ldl(s - shift * np.eye(n))
    neg = 0
    hit = False
    i = 0
    while i < n:
        if i + 1 < n and d[i, i + 1] != 0.0:
            det = d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            tr = d[i, i] + d[i + 1, i + 1]
            if det < 0.0:
                neg += 1
            elif det > 0.0:
                neg += 2 if tr < 0.0 else 0
            else:
                hit = True
                neg += 1 + (1 if tr < 0.0 else 0)
            i += 2
        else:
            if abs(d[i, i]) < tiny:
                hit = True
                neg += 1
            elif d[i, i] < 0.0:
                neg += 1
            i += 1
    return neg, hit


def dense_count_below(s, shift):
    """Number of eigenvalues < shift via LDL^T inertia (no eigensolve).

    Exact zero pivots count as below, matching the tridiagonal kernel's
    safeguard convention.
    """
    return _dense_count_below_flagged(_check_symmetric(s), shift)[0]


def dense_count_in_interval(s, interval, tol=None) -> CountResult:
    """Open-interval count for a dense symmetric matrix via LDL^T inertia.

    As in the tridiagonal path, an exact factorization breakdown at an
    endpoint retries with the shift pulled inward by ``tol``.
    """
    s = _check_symmetric(s)
    alpha, beta = float(interval[0]), float(interval[1])
    if not alpha < beta:
        raise ValueError("interval must satisfy alpha < beta")
    if tol is None:
        tol = TOL_FACTOR * max(1.0, float(np.linalg.norm(s, 2)) if s.size else 1.0)
    c_a, hit_a = _dense_count_below_flagged(s, alpha)
    c_b, hit_b = _dense_count_below_flagged(s, beta)
    if hit_a:
        c_a = _dense_count_below_flagged(s, alpha + tol)[0]
    if hit_b:
        c_b = _dense_count_below_flagged(s, beta - tol)[0]
    flag_lo = hit_a or (
        dense_count_below(s, alpha + tol) - dense_count_below(s, alpha - tol) > 0
    )
    flag_hi = hit_b or (
        dense_count_below(s, beta + tol) - dense_count_below(s, beta - tol) > 0
    )
    return CountResult((alpha, beta), int(max(c_b - c_a, 0)), (bool(flag_lo), bool(flag_hi)))
