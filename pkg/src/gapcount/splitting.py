"""Decomposition of a Jacobi perturbation into a positive difference.

delta J = plus - minus with ``plus`` diagonal and ``minus`` symmetric
tridiagonal, both positive semidefinite:

    plus_nn   = (delta_b_n)_+ + |delta_a_{n-1}| + |delta_a_n|
    minus_nn  = (delta_b_n)_- + |delta_a_{n-1}| + |delta_a_n|
    minus_{n, n+1} = -delta_a_n

``minus`` is weakly diagonally dominant with nonnegative diagonal, hence
PSD by Gershgorin, for either sign of delta_a.  At the window edges the
|delta_a| weights of couplings that leave the window are kept on the
diagonal, so positivity does not depend on the window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperatorError
from .operators import Perturbation

__all__ = ["SplitPerturbation", "split"]


@dataclass(frozen=True)
class SplitPerturbation:
    n_lo: int
    n_hi: int
    plus_diag: np.ndarray
    minus_diag: np.ndarray
    minus_off: np.ndarray

    @property
    def size(self):
        return self.plus_diag.shape[0]

    @property
    def sites(self):
        return np.arange(self.n_lo, self.n_hi + 1)

    def index_of(self, n):
        if not self.n_lo <= n <= self.n_hi:
            raise IndexError(f"site {n} outside window [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def delta_diag(self):
        """Reconstructed delta_b over the window (plus - minus, diagonal part)."""
        return self.plus_diag - self.minus_diag

    def delta_off(self):
        """Reconstructed delta_a over the window (plus - minus, off-diagonal part)."""
        return -self.minus_off

    def minus_tridiag(self):
        return self.minus_diag, self.minus_off

    def plus_dense(self):
        return np.diag(self.plus_diag)

    def minus_dense(self):
        m = np.diag(self.minus_diag)
        if self.size > 1:
            idx = np.arange(self.size - 1)
            m[idx, idx + 1] = self.minus_off
            m[idx + 1, idx] = self.minus_off
        return m

    def trace_plus(self):
        return float(np.sum(self.plus_diag))

    def trace_minus(self):
        return float(np.sum(self.minus_diag))


def split(pert: Perturbation, window) -> SplitPerturbation:
    """Materialize the positive/negative split of a perturbation on a window."""
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_hi < n_lo:
        raise InvalidOperatorError("window is empty")
    n = np.arange(n_lo, n_hi + 1)
    db = np.asarray(pert.delta_b(n), dtype=float)
    da = np.asarray(pert.delta_a(np.arange(n_lo - 1, n_hi + 1)), dtype=float)
    # da[i] couples site n_lo-1+i to its right neighbor; |da| weights at a
    # site n are |delta_a_{n-1}| + |delta_a_n| regardless of the window.
    weight = np.abs(da[:-1]) + np.abs(da[1:])
    plus_diag = np.maximum(db, 0.0) + weight
    minus_diag = np.maximum(-db, 0.0) + weight
    minus_off = -da[1:-1] if n.size > 1 else np.zeros(0)
    return SplitPerturbation(n_lo, n_hi, plus_diag, minus_diag, minus_off)
