"""Periodic Jacobi backgrounds, decaying perturbations, and finite sections.

A two-sided Jacobi matrix is determined by off-diagonals a_n > 0 and
diagonals b_n.  Backgrounds are periodic (entry at site n is the entry at
n mod p); perturbations are deterministic site maps generated either from an
explicit finite-support table or from power-law / log-weight decay families.
Finite sections are Dirichlet: couplings across the window boundary are
dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import InvalidOperatorError, NonSummableError

__all__ = [
    "PeriodicBackground",
    "Perturbation",
    "FiniteSupportPerturbation",
    "PowerLawPerturbation",
    "LogWeightPerturbation",
    "JacobiOperator",
    "TruncatedMatrix",
    "make_perturbation",
    "perturbation_norms",
    "zero_perturbation",
    "free_background",
]


@dataclass(frozen=True)
class PeriodicBackground:
    """One period of (a_n, b_n); site n carries a[n mod p], b[n mod p]."""

    period: int
    a: tuple
    b: tuple

    def __post_init__(self):
        if self.period < 1:
            raise InvalidOperatorError("period must be >= 1")
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.a) != self.period or len(self.b) != self.period:
            raise InvalidOperatorError(
                "a and b must each have exactly `period` entries"
            )
        if not all(math.isfinite(x) for x in self.a + self.b):
            raise InvalidOperatorError("background entries must be finite")
        if any(x <= 0.0 for x in self.a):
            raise InvalidOperatorError("all off-diagonal entries a[k] must be > 0")

    def a_at(self, n):
        """Off-diagonal a_n coupling sites n and n+1."""
        return self.a[n % self.period]

    def b_at(self, n):
        return self.b[n % self.period]

    def spectrum_bounds(self):
        """Crude enclosure of the spectrum (Gershgorin)."""
        amax = max(self.a)
        return min(self.b) - 2.0 * amax, max(self.b) + 2.0 * amax


def free_background():
    """The free Jacobi matrix: a_n = 1, b_n = 0."""
    return PeriodicBackground(1, (1.0,), (0.0,))


class Perturbation:
    """Base class: a deterministic map n -> (delta_a_n, delta_b_n)."""

    kind = "abstract"

    def delta_a(self, n):
        raise NotImplementedError

    def delta_b(self, n):
        raise NotImplementedError

    def delta(self, n):
        return float(self.delta_a(n)), float(self.delta_b(n))

    @property
    def is_trace_class(self):
        """Whether sum(|delta_a_n| + |delta_b_n|) converges."""
        raise NotImplementedError

    def satisfies_log_weight(self, eps):
        """Whether sum log(|n|+1)^{1+eps} (|delta_a_n|+|delta_b_n|) converges."""
        raise NotImplementedError

    def tail_bound(self, radius):
        """Upper bound on sum_{|n| > radius} (|delta_a_n| + |delta_b_n|)."""
        raise NotImplementedError

    def support_radius(self, tau):
        """Smallest R >= 0 with the tail beyond R certified below tau."""
        if tau <= 0.0:
            raise ValueError("tau must be > 0")
        if not self.is_trace_class:
            raise NonSummableError(
                f"{self.kind} perturbation is not summable; "
                "support_radius is undefined"
            )
        if self.tail_bound(0) < tau:
            return 0
        lo, hi = 0, 1
        while self.tail_bound(hi) >= tau:
            hi *= 2
            if hi > 10**15:
                raise NonSummableError("tail does not fall below tau")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail_bound(mid) < tau:
                hi = mid
            else:
                lo = mid
        return hi


def _alt_sign(n):
    n = np.asarray(n)
    return np.where(n % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class FiniteSupportPerturbation(Perturbation):
    """Explicit site table; zero off the listed sites."""

    sites: tuple = ()

    kind = "finite"

    def __post_init__(self):
        norm = tuple(sorted((int(n), float(da), float(db)) for n, da, db in self.sites))
        if len({n for n, _, _ in norm}) != len(norm):
            raise InvalidOperatorError("duplicate sites in finite-support table")
        object.__setattr__(self, "sites", norm)
        object.__setattr__(self, "_table", {n: (da, db) for n, da, db in norm})

    def delta_a(self, n):
        if np.ndim(n):
            return np.array([self._table.get(int(k), (0.0, 0.0))[0] for k in n])
        return self._table.get(int(n), (0.0, 0.0))[0]

    def delta_b(self, n):
        if np.ndim(n):
            return np.array([self._table.get(int(k), (0.0, 0.0))[1] for k in n])
        return self._table.get(int(n), (0.0, 0.0))[1]

    @property
    def is_trace_class(self):
        return True

    def satisfies_log_weight(self, eps):
        return True

    def tail_bound(self, radius):
        return sum(
            abs(da) + abs(db) for n, da, db in self.sites if abs(n) > radius
        )


def _power_tail(amp, exp, radius):
    # sum_{|n| > R} |amp| (1+|n|)^{-exp} = 2 |amp| * hurwitz_zeta(exp, R+2)
    if amp == 0.0:
        return 0.0
    return 2.0 * abs(amp) * float(zeta(exp, radius + 2))


@dataclass(frozen=True)
class PowerLawPerturbation(Perturbation):
    """delta_b_n = b_amp * sgn(n) * (1+|n|)^{-b_exp}, optionally alternating
    sgn(n) = (-1)^n, and likewise for the a components."""

    b_amp: float = 0.0
    b_exp: float = 2.0
    b_alternating: bool = False
    a_amp: float = 0.0
    a_exp: float = 2.0
    a_alternating: bool = False
    allow_non_summable: bool = False

    kind = "power"

    def __post_init__(self):
        if not self.is_trace_class and not self.allow_non_summable:
            raise NonSummableError(
                "power-law exponent <= 1 gives a non-summable perturbation; "
                "pass allow_non_summable=True to construct it anyway"
            )

    def delta_a(self, n):
        if self.a_amp == 0.0:
            return np.zeros_like(np.asarray(n, dtype=float)) if np.ndim(n) else 0.0
        base = self.a_amp * (1.0 + np.abs(n)) ** (-self.a_exp)
        return base * _alt_sign(n) if self.a_alternating else base

    def delta_b(self, n):
        if self.b_amp == 0.0:
            return np.zeros_like(np.asarray(n, dtype=float)) if np.ndim(n) else 0.0
        base = self.b_amp * (1.0 + np.abs(n)) ** (-self.b_exp)
        return base * _alt_sign(n) if self.b_alternating else base

    @property
    def is_trace_class(self):
        ok_a = self.a_amp == 0.0 or self.a_exp > 1.0
        ok_b = self.b_amp == 0.0 or self.b_exp > 1.0
        return ok_a and ok_b

    def satisfies_log_weight(self, eps):
        # log(|n|+1)^{1+eps} (1+|n|)^{-exp} is summable iff exp > 1.
        return self.is_trace_class

    def tail_bound(self, radius):
        return _power_tail(self.a_amp, self.a_exp, radius) + _power_tail(
            self.b_amp, self.b_exp, radius
        )


def _log_tail(amp, logexp, radius):
    # integral majorant: sum_{|n|>R} |amp| (1+|n|)^{-1} log(2+|n|)^{-g}
    #   <= 4 |amp| log(2+R)^{1-g} / (g-1)   for g > 1.
    if amp == 0.0:
        return 0.0
    return 4.0 * abs(amp) * math.log(2.0 + radius) ** (1.0 - logexp) / (logexp - 1.0)


@dataclass(frozen=True)
class LogWeightPerturbation(Perturbation):
    """delta_b_n = b_amp (1+|n|)^{-1} log(2+|n|)^{-b_logexp}, same shape for a.

    Summable iff the log exponent exceeds 1; satisfies the log-weighted
    summability condition with parameter eps iff the log exponent exceeds
    2 + eps.
    """

    b_amp: float = 0.0
    b_logexp: float = 3.0
    a_amp: float = 0.0
    a_logexp: float = 3.0
    allow_non_summable: bool = False

    kind = "logweight"

    def __post_init__(self):
        if not self.is_trace_class and not self.allow_non_summable:
            raise NonSummableError(
                "log-weight exponent <= 1 gives a non-summable perturbation; "
                "pass allow_non_summable=True to construct it anyway"
            )

    def delta_a(self, n):
        if self.a_amp == 0.0:
            return np.zeros_like(np.asarray(n, dtype=float)) if np.ndim(n) else 0.0
        an = np.abs(n)
        return self.a_amp / ((1.0 + an) * np.log(2.0 + an) ** self.a_logexp)

    def delta_b(self, n):
        if self.b_amp == 0.0:
            return np.zeros_like(np.asarray(n, dtype=float)) if np.ndim(n) else 0.0
        an = np.abs(n)
        return self.b_amp / ((1.0 + an) * np.log(2.0 + an) ** self.b_logexp)

    @property
    def is_trace_class(self):
        ok_a = self.a_amp == 0.0 or self.a_logexp > 1.0
        ok_b = self.b_amp == 0.0 or self.b_logexp > 1.0
        return ok_a and ok_b

    def satisfies_log_weight(self, eps):
        ok_a = self.a_amp == 0.0 or self.a_logexp > 2.0 + eps
        ok_b = self.b_amp == 0.0 or self.b_logexp > 2.0 + eps
        return ok_a and ok_b

    def tail_bound(self, radius):
        if not self.is_trace_class:
            return math.inf
        return _log_tail(self.a_amp, self.a_logexp, radius) + _log_tail(
            self.b_amp, self.b_logexp, radius
        )


def zero_perturbation():
    return FiniteSupportPerturbation(())


def make_perturbation(kind, **params):
    """Factory for the three perturbation families.

    kind = "finite":    params: sites = iterable of (n, delta_a, delta_b)
    kind = "power":     params: b_amp, b_exp, b_alternating, a_amp, a_exp,
                        a_alternating, allow_non_summable
    kind = "logweight": params: b_amp, b_logexp, a_amp, a_logexp,
                        allow_non_summable
    kind = "none":      the zero perturbation

    Non-summable families raise NonSummableError unless
    allow_non_summable=True is passed.
    """
    if kind == "finite":
        return FiniteSupportPerturbation(tuple(params.get("sites", ())))
    if kind == "power":
        return PowerLawPerturbation(**params)
    if kind == "logweight":
        return LogWeightPerturbation(**params)
    if kind == "none":
        return zero_perturbation()
    raise InvalidOperatorError(f"unknown perturbation kind {kind!r}")


def perturbation_norms(pert, radius, eps=1.0):
    """Partial sums over |n| <= radius of the plain and log-weighted
    first-order norms.

    Returns (tc_norm, log_weighted_norm) where
    tc_norm         = sum |delta_a_n| + |delta_b_n|
    log_weighted    = sum log(|n|+1)^{1+eps} (|delta_a_n| + |delta_b_n|)
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if isinstance(pert, FiniteSupportPerturbation):
        tc = 0.0
        lw = 0.0
        for n, da, db in pert.sites:
            if abs(n) <= radius:
                w = abs(da) + abs(db)
                tc += w
                lw += math.log(abs(n) + 1.0) ** (1.0 + eps) * w
        return tc, lw
    n = np.arange(-radius, radius + 1)
    mags = np.abs(pert.delta_a(n)) + np.abs(pert.delta_b(n))
    tc = float(np.sum(mags))
    lw = float(np.sum(np.log(np.abs(n) + 1.0) ** (1.0 + eps) * mags))
    return tc, lw


@dataclass(frozen=True)
class JacobiOperator:
    """J = J0 + delta J: periodic background plus decaying perturbation."""

    background: PeriodicBackground
    perturbation: Perturbation = field(default_factory=zero_perturbation)

    def truncate(self, window):
        return truncate(self, window)


@dataclass(frozen=True)
class TruncatedMatrix:
    """Dirichlet finite section over the integer window [n_lo, n_hi]."""

    n_lo: int
    n_hi: int
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.ascontiguousarray(self.diag, dtype=np.float64)
        off = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        if self.n_hi < self.n_lo:
            raise InvalidOperatorError("window is empty")
        if diag.shape[0] != self.n_hi - self.n_lo + 1:
            raise InvalidOperatorError("diag length does not match window")
        if off.shape[0] != diag.shape[0] - 1:
            raise InvalidOperatorError("offdiag length must be len(diag) - 1")
        if off.size and not np.all(off > 0.0):
            raise InvalidOperatorError("all off-diagonals must be > 0")
        if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
            raise InvalidOperatorError("matrix entries must be finite")
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def size(self):
        return self.diag.shape[0]

    @property
    def sites(self):
        return np.arange(self.n_lo, self.n_hi + 1)

    def index_of(self, n):
        if not self.n_lo <= n <= self.n_hi:
            raise IndexError(f"site {n} outside window [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def to_dense(self):
        m = np.diag(self.diag)
        if self.size > 1:
            idx = np.arange(self.size - 1)
            m[idx, idx + 1] = self.offdiag
            m[idx + 1, idx] = self.offdiag
        return m

    def norm_bound(self):
        """Gershgorin upper bound on the spectral norm."""
        r = np.zeros(self.size)
        if self.size > 1:
            r[:-1] += np.abs(self.offdiag)
            r[1:] += np.abs(self.offdiag)
        return float(np.max(np.abs(self.diag) + r)) if self.size else 0.0

    def spectrum_bracket(self):
        """Gershgorin interval certainly containing all eigenvalues."""
        r = np.zeros(self.size)
        if self.size > 1:
            r[:-1] += np.abs(self.offdiag)
            r[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))


def truncate(op, window):
    """Dirichlet section of a Jacobi operator over window = (n_lo, n_hi)."""
    if isinstance(op, PeriodicBackground):
        op = JacobiOperator(op, zero_perturbation())
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_hi < n_lo:
        raise InvalidOperatorError("window is empty")
    bg, pert = op.background, op.perturbation
    n = np.arange(n_lo, n_hi + 1)
    diag = np.array([bg.b_at(k) for k in n]) + np.asarray(pert.delta_b(n), dtype=float)
    if n.size > 1:
        na = n[:-1]
        off = np.array([bg.a_at(k) for k in na]) + np.asarray(
            pert.delta_a(na), dtype=float
        )
        if not np.all(off > 0.0):
            bad = int(na[np.argmin(off)])
            raise InvalidOperatorError(
                f"perturbed off-diagonal at site {bad} is not positive"
            )
    else:
        off = np.zeros(0)
    return TruncatedMatrix(n_lo, n_hi, diag, off)
