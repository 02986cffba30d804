"""Birman-Schwinger kernels in spectral gaps and the counting inequalities.

For a self-adjoint A with gap (x, y) and compact B >= 0, e in the gap is an
eigenvalue of A + mu B exactly when 1/mu is an eigenvalue of
B^{1/2} (e - A)^{-1} B^{1/2}, with equal multiplicity.  This module builds
those kernels (by linear solves, never full inversion), verifies the
equivalence, and evaluates both sides of the three counting bounds:

t11: #(C in (e0, e1)) <= #(K_+(e0) >= 1) + #(B_- >= (y-x)/2)
t31: as t11 with the second term replaced by
     #(B_-^{1/2} (A-q+1)^{-1} B_-^{1/2} >= (y-x)/2 / (y-q+1)), q = min spec(A)
t32: #(C in (e1, e0)) <= #(B_-^{1/2} (A-e0)^{-1} B_-^{1/2} >= 1)
     + #(B_+^{1/2} (e1 - (A-B_-))^{-1} E_{(-inf,x)}(A-B_-) B_+^{1/2} >= 1)

where C = A + B_+ - B_-, e1 is the gap midpoint, and the t32 cross term is
assembled exactly from the spectral projection of A - B_-.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import inertia
from ._parallel import parallel_map
from .errors import ResolventProximityError
from .operators import TruncatedMatrix

__all__ = [
    "BSOperator",
    "BoundReport",
    "Prop21Report",
    "BSDecomposition",
    "bs_operator",
    "verify_prop21",
    "gap_bound",
    "bs_decompose",
    "random_gap_instance",
    "run_bound_campaign",
    "run_prop21_campaign",
]

SUPPORT_RTOL = 1e-14     # rows of B below this (times ||B||) are dropped
SYMMETRY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# matrix plumbing: A may be a TruncatedMatrix or a dense symmetric array;
# B parts may be None, a diagonal, a (diag, off) tridiagonal pair, or dense.


def _dim(a):
    return a.size if isinstance(a, TruncatedMatrix) else np.asarray(a).shape[0]


def _a_dense(a):
    return a.to_dense() if isinstance(a, TruncatedMatrix) else np.asarray(a, dtype=float)


def _count_interval(a, interval, tol=None):
    if isinstance(a, TruncatedMatrix):
        return inertia.count_in_interval(a, interval, tol)
    return inertia.dense_count_in_interval(np.asarray(a, dtype=float), interval, tol)


def _count_interval_raw(diag, off, interval, tol=None):
    return inertia.count_in_interval((diag, off), interval, tol)


def _solve_shifted(a, e, rhs):
    """Solve (e*I - A) X = rhs without forming the inverse."""
    if isinstance(a, TruncatedMatrix):
        n = a.size
        ab = np.zeros((3, n))
        ab[1] = e - a.diag
        if n > 1:
            ab[0, 1:] = -a.offdiag
            ab[2, :-1] = -a.offdiag
        return sla.solve_banded((1, 1), ab, rhs)
    m = e * np.eye(_dim(a)) - np.asarray(a, dtype=float)
    return sla.solve(m, rhs, assume_a="sym")


class _BPart:
    """Uniform view of a PSD perturbation part (diagonal/tridiagonal/dense)."""

    def __init__(self, raw, n):
        self.n = n
        if raw is None:
            self.form = "zero"
            self.diag = np.zeros(n)
            self.off = np.zeros(max(n - 1, 0))
        elif isinstance(raw, tuple):
            diag, off = raw
            self.form = "tridiag"
            self.diag = np.asarray(diag, dtype=float)
            self.off = np.asarray(off, dtype=float)
            if self.diag.shape[0] != n or self.off.shape[0] != max(n - 1, 0):
                raise ValueError("tridiagonal part does not match operator size")
        else:
            arr = np.asarray(raw, dtype=float)
            if arr.ndim == 1:
                self.form = "diag"
                self.diag = arr
                self.off = np.zeros(max(n - 1, 0))
                if arr.shape[0] != n:
                    raise ValueError("diagonal part does not match operator size")
            else:
                self.form = "dense"
                self.dense_mat = 0.5 * (arr + arr.T)
                self.diag = np.diag(self.dense_mat).copy()
                self.off = None
                if arr.shape != (n, n):
                    raise ValueError("dense part does not match operator size")

    @property
    def is_zero(self):
        if self.form == "zero":
            return True
        if self.form == "dense":
            return not np.any(self.dense_mat)
        return not (np.any(self.diag) or np.any(self.off))

    def dense(self):
        if self.form == "dense":
            return self.dense_mat
        m = np.diag(self.diag)
        if self.form == "tridiag" and self.n > 1:
            idx = np.arange(self.n - 1)
            m[idx, idx + 1] = self.off
            m[idx + 1, idx] = self.off
        return m

    def norm_bound(self):
        if self.form == "dense":
            return float(np.linalg.norm(self.dense_mat, 2)) if self.n else 0.0
        r = np.abs(self.diag).astype(float)
        if self.form == "tridiag" and self.n > 1:
            r[:-1] += np.abs(self.off)
            r[1:] += np.abs(self.off)
        return float(np.max(r)) if self.n else 0.0

    def support(self):
        """Indices whose diagonal-plus-row norm is non-negligible."""
        thr = SUPPORT_RTOL * max(self.norm_bound(), np.finfo(float).tiny)
        if self.form == "dense":
            weight = np.abs(self.diag) + np.sum(np.abs(self.dense_mat), axis=1)
        else:
            weight = 2.0 * np.abs(self.diag)
            if self.form == "tridiag" and self.n > 1:
                weight[:-1] += np.abs(self.off)
                weight[1:] += np.abs(self.off)
        return np.nonzero(weight > thr)[0]

    def sqrt_on_support(self):
        """(support indices, matrix square root of the restriction).

        Negative round-off eigenvalues are clamped to zero.
        """
        sup = self.support()
        if sup.size == 0:
            return sup, np.zeros((0, 0))
        sub = self.dense()[np.ix_(sup, sup)]
        w, v = np.linalg.eigh(sub)
        w = np.clip(w, 0.0, None)
        s = (v * np.sqrt(w)) @ v.T
        return sup, s

    def count_ge(self, threshold):
        """Number of eigenvalues >= threshold."""
        if self.is_zero:
            return self.n if threshold <= 0.0 else 0
        if self.form == "dense":
            return inertia.dense_count_ge(self.dense_mat, threshold)
        if self.form == "diag" or self.form == "zero":
            return int(np.sum(self.diag >= threshold))
        return self.n - inertia.count_below((self.diag, self.off), threshold)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BSOperator:
    """Dense symmetric kernel B^{1/2} (e - A)^{-1} B^{1/2} on the support of B."""

    kernel: np.ndarray
    support: tuple
    energy: float

    @property
    def dimension(self):
        return self.kernel.shape[0]

    def eigenvalues(self):
        if self.dimension == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.kernel)

    def count_ge(self, threshold=1.0):
        return int(np.sum(self.eigenvalues() >= threshold))


def _check_resolvent_distance(a, e, tol):
    probe = _count_interval(a, (e - tol, e + tol), tol=tol)
    if probe.count > 0 or any(probe.boundary_flags):
        raise ResolventProximityError(
            f"energy {e!r} is within {tol!r} of the spectrum; move e or "
            "enlarge the window"
        )


def _check_gap_empty(a, x, y):
    # probe the slightly inset interval: eigenvalues sitting exactly on a
    # gap endpoint do not violate the open-gap precondition
    inset = 1e-9 * (y - x)
    if _count_interval(a, (x + inset, y - inset)).count > 0:
        raise ValueError("gap precondition failed: spectrum inside (x, y)")


def bs_operator(a, b_plus, e, tol=None) -> BSOperator:
    """Build the Birman-Schwinger kernel at energy e off the spectrum of A.

    ``b_plus`` is a PSD perturbation (diagonal array, (diag, off) pair, or
    dense matrix); the kernel is restricted to its support.  The resolvent
    is applied through linear solves.
    """
    n = _dim(a)
    bp = b_plus if isinstance(b_plus, _BPart) else _BPart(b_plus, n)
    if tol is None:
        tol = 1e-8 * max(
            1.0,
            a.norm_bound() if isinstance(a, TruncatedMatrix) else float(np.linalg.norm(_a_dense(a), 2)),
        )
    e = float(e)
    _check_resolvent_distance(a, e, tol)
    if bp.is_zero:
        return BSOperator(np.zeros((0, 0)), (), e)
    if bp.form == "diag":
        sup = bp.support()
        root = np.sqrt(bp.diag[sup])
        rhs = np.zeros((n, sup.size))
        rhs[sup, np.arange(sup.size)] = 1.0
        res = _solve_shifted(a, e, rhs)
        kernel = root[:, None] * res[sup, :] * root[None, :]
    else:
        sup, s = bp.sqrt_on_support()
        rhs = np.zeros((n, sup.size))
        rhs[sup, :] = s
        res = _solve_shifted(a, e, rhs)
        kernel = s.T @ res[sup, :]
    kernel = 0.5 * (kernel + kernel.T)
    return BSOperator(kernel, tuple(int(i) for i in sup), e)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prop21Report:
    """Result of checking the gap Birman-Schwinger equivalence on a mu grid."""

    energy: float
    gap: tuple
    checks: tuple          # (mu, mult_operator_side, mult_kernel_side)
    violations: int
    max_vector_residual: float

    @property
    def ok(self):
        return self.violations == 0


def verify_prop21(a, b, gap, e, mu_grid, tol=1e-8) -> Prop21Report:
    """Check e in spec(A + mu B) <=> 1/mu in spec(kernel) with equal
    multiplicity for every mu in the grid.

    Each side is counted inside a tolerance window scaled to that side.  A
    grid point is a violation when the kernel side hits (1/mu within its
    window of a kernel eigenvalue) but the operator multiplicity differs,
    or when the operator side finds eigenvalues at e although 1/mu is far
    (1e6 windows) from every kernel eigenvalue.  The buffer in between is
    window slop of the two counting scales, not evidence either way.
    Where the operator side has eigenvalues, the eigenvector direction is
    checked against (e - A)^{-1} B phi = phi / mu.
    """
    x, y = float(gap[0]), float(gap[1])
    if not x < e < y:
        raise ValueError("e must lie inside the gap")
    _check_gap_empty(a, x, y)
    n = _dim(a)
    bp = b if isinstance(b, _BPart) else _BPart(b, n)
    op = bs_operator(a, bp, e, tol=1e-6 * (y - x))
    kappa = op.eigenvalues()
    a_scale = (
        a.norm_bound() if isinstance(a, TruncatedMatrix) else float(np.linalg.norm(_a_dense(a), 2))
    )
    b_scale = bp.norm_bound()
    dense_side = not isinstance(a, TruncatedMatrix) or n <= 512
    checks = []
    violations = 0
    max_res = 0.0
    for mu in mu_grid:
        mu = float(mu)
        if mu == 0.0:
            raise ValueError("mu = 0 is not admissible")
        w_kernel = tol * (1.0 + abs(1.0 / mu))
        dist_kernel = (
            float(np.min(np.abs(kappa - 1.0 / mu))) if kappa.size else np.inf
        )
        m_kernel = int(np.sum(np.abs(kappa - 1.0 / mu) <= w_kernel))
        w_op = tol * (1.0 + a_scale + abs(mu) * b_scale)
        if isinstance(a, TruncatedMatrix) and bp.form in ("zero", "diag", "tridiag"):
            diag = a.diag + bp.diag * mu
            off = a.offdiag + (mu * bp.off if bp.form == "tridiag" else 0.0)
            m_op = _count_interval_raw(diag, off, (e - w_op, e + w_op), tol=w_op / 4).count
        else:
            c = _a_dense(a) + mu * bp.dense()
            m_op = inertia.dense_count_in_interval(c, (e - w_op, e + w_op), tol=w_op / 4).count
        if m_kernel > 0 and m_op != m_kernel:
            violations += 1
        elif m_kernel == 0 and m_op > 0 and dist_kernel > 1e6 * w_kernel:
            violations += 1
        if m_op > 0 and dense_side:
            c = _a_dense(a) + mu * bp.dense()
            w, v = np.linalg.eigh(c)
            idx = np.argmin(np.abs(w - e))
            phi = v[:, idx]
            lhs = _solve_shifted(a, e, bp.dense() @ phi)
            res = np.linalg.norm(lhs - phi / mu)
            max_res = max(max_res, float(res))
        checks.append((mu, m_op, m_kernel))
    return Prop21Report(e, (x, y), tuple(checks), violations, max_res)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Two-sided evaluation of one counting inequality."""

    variant: str
    lhs: int
    rhs: int
    terms: dict
    satisfied: bool
    gap: tuple
    e0: float
    e1: float
    q: float | None = None
    boundary_flags: tuple = (False, False)

    def to_dict(self):
        return {
            "variant": self.variant,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "terms": dict(self.terms),
            "satisfied": self.satisfied,
            "gap": list(self.gap),
            "e0": self.e0,
            "e1": self.e1,
            "q": self.q,
        }


def _combined_c(a, bp, bm):
    """A + B_+ - B_- , staying tridiagonal when all parts allow it."""
    if (
        isinstance(a, TruncatedMatrix)
        and bp.form in ("zero", "diag")
        and bm.form in ("zero", "diag", "tridiag")
    ):
        diag = a.diag + bp.diag - bm.diag
        off = a.offdiag - (bm.off if bm.form == "tridiag" else 0.0)
        return ("tridiag", diag, off)
    return ("dense", _a_dense(a) + bp.dense() - bm.dense(), None)


def gap_bound(variant, a, b_plus, b_minus, gap, e0, tol=None) -> BoundReport:
    """Evaluate lhs and rhs of the selected counting inequality.

    variant "t11"/"t31" count C = A + B_+ - B_- in (e0, e1) with
    x < e0 < e1 = (x+y)/2; variant "t32" counts C in (e1, e0) with
    e1 < e0 < y.
    """
    variant = variant.lower()
    if variant not in ("t11", "t31", "t32"):
        raise ValueError(f"unknown variant {variant!r}")
    x, y = float(gap[0]), float(gap[1])
    e0 = float(e0)
    e1 = 0.5 * (x + y)
    if variant in ("t11", "t31") and not x < e0 < e1:
        raise ValueError("t11/t31 require x < e0 < e1 = (x+y)/2")
    if variant == "t32" and not e1 < e0 < y:
        raise ValueError("t32 requires e1 = (x+y)/2 < e0 < y")
    _check_gap_empty(a, x, y)
    n = _dim(a)
    bp = _BPart(b_plus, n)
    bm = _BPart(b_minus, n)
    if tol is None:
        tol = 1e-6 * (y - x)

    form, cd, co = _combined_c(a, bp, bm)
    target = (e0, e1) if variant in ("t11", "t31") else (e1, e0)
    if form == "tridiag":
        cres = _count_interval_raw(cd, co, target)
    else:
        cres = inertia.dense_count_in_interval(cd, target)
    lhs = cres.count

    terms = {}
    if variant in ("t11", "t31"):
        k_plus = bs_operator(a, bp, e0, tol=tol)
        terms["bs_plus_at_e0"] = k_plus.count_ge(1.0)
        if variant == "t11":
            terms["b_minus_ge_half_gap"] = bm.count_ge(0.5 * (y - x))
        else:
            if isinstance(a, TruncatedMatrix):
                q = inertia.smallest_eigenvalue(a)
            else:
                q = float(np.linalg.eigvalsh(_a_dense(a)).min())
            threshold = 0.5 * (y - x) / (y - q + 1.0)
            if bm.is_zero:
                terms["bs_minus_shifted"] = 0
            else:
                sup, s = bm.sqrt_on_support()
                rhs = np.zeros((n, sup.size))
                rhs[sup, :] = s
                # (A - q + 1)^{-1} = -((q - 1) I - A)^{-1}
                res = -_solve_shifted(a, q - 1.0, rhs)
                k2 = s.T @ res[sup, :]
                terms["bs_minus_shifted"] = inertia.dense_count_ge(
                    0.5 * (k2 + k2.T), threshold
                )
            rhs_total = sum(terms.values())
            return BoundReport(
                variant, lhs, rhs_total, terms, lhs <= rhs_total, (x, y), e0, e1,
                q=q, boundary_flags=cres.boundary_flags,
            )
    else:
        # down-moving kernel at e0: B_-^{1/2} (A - e0)^{-1} B_-^{1/2}
        if bm.is_zero:
            terms["bs_minus_at_e0"] = 0
        else:
            sup, s = bm.sqrt_on_support()
            _check_resolvent_distance(a, e0, tol)
            rhs = np.zeros((n, sup.size))
            rhs[sup, :] = s
            res = -_solve_shifted(a, e0, rhs)
            k3 = s.T @ res[sup, :]
            terms["bs_minus_at_e0"] = inertia.dense_count_ge(0.5 * (k3 + k3.T), 1.0)
        # cross term from the spectral projection of A - B_- below x
        if bp.is_zero:
            terms["cross_projected"] = 0
        else:
            if isinstance(a, TruncatedMatrix) and bm.form in ("zero", "diag", "tridiag"):
                dm = a.diag - bm.diag
                om = a.offdiag - (bm.off if bm.form == "tridiag" else 0.0)
                w, v = sla.eigh_tridiagonal(dm, om)
            else:
                w, v = np.linalg.eigh(_a_dense(a) - bm.dense())
            sel = w < x
            if not np.any(sel):
                terms["cross_projected"] = 0
            else:
                sup, s = bp.sqrt_on_support()
                vs = v[np.ix_(sup.tolist(), np.nonzero(sel)[0].tolist())]
                # (e1 - (A - B_-))^{-1} on the projected subspace is positive
                k4 = (vs * (1.0 / (e1 - w[sel]))) @ vs.T
                k4 = s @ k4 @ s
                terms["cross_projected"] = inertia.dense_count_ge(
                    0.5 * (k4 + k4.T), 1.0
                )

    rhs_total = sum(terms.values())
    return BoundReport(
        variant, lhs, rhs_total, terms, lhs <= rhs_total, (x, y), e0, e1,
        boundary_flags=cres.boundary_flags,
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BSDecomposition:
    """B_-^{1/2} (C_+ - e1)^{-1} B_-^{1/2} split by spectral location of C_+."""

    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    n2: int
    checks: dict = field(default_factory=dict)


def bs_decompose(b_minus, c_plus, e1, y, tol=None, x=None) -> BSDecomposition:
    """Split the kernel through the spectral projections of C_+ onto
    (-inf, e1), (e1, y), [y, inf).

    Reported checks: d1 is negative semidefinite, rank(d2) <= #(C_+ in
    (e1, y)), the parts sum to the unprojected kernel, and (when x is
    supplied) d3 <= B_- / ((y - x)/2) on the support.
    """
    n = _dim(c_plus)
    bm = b_minus if isinstance(b_minus, _BPart) else _BPart(b_minus, n)
    e1 = float(e1)
    y = float(y)
    if not e1 < y:
        raise ValueError("need e1 < y")
    if isinstance(c_plus, TruncatedMatrix):
        w, v = sla.eigh_tridiagonal(c_plus.diag, c_plus.offdiag)
        scale = c_plus.norm_bound()
    else:
        cd = _a_dense(c_plus)
        w, v = np.linalg.eigh(cd)
        scale = float(np.abs(w).max()) if w.size else 1.0
    if tol is None:
        tol = 1e-10 * max(1.0, scale)
    if np.any(np.abs(w - e1) <= tol):
        raise ResolventProximityError(
            "e1 within tolerance of the spectrum of C_+; the resolvent "
            "factor is ill-defined"
        )
    if bm.is_zero:
        z = np.zeros((0, 0))
        return BSDecomposition(z, z, z, int(np.sum((w > e1) & (w < y))), {
            "d1_negative": True, "d2_rank_ok": True, "sum_matches": True,
            "d3_dominated": True,
        })
    sup, s = bm.sqrt_on_support()
    vs = v[sup, :]
    inv = 1.0 / (w - e1)

    def part(mask):
        cols = np.nonzero(mask)[0]
        if cols.size == 0:
            return np.zeros((sup.size, sup.size))
        block = (vs[:, cols] * inv[cols]) @ vs[:, cols].T
        m = s @ block @ s
        return 0.5 * (m + m.T)

    # eigenvalues within tol of y go with the (closed) upper projection
    d1 = part(w < e1)
    d2 = part((w > e1) & (w < y - tol))
    d3 = part(w >= y - tol)
    n2 = int(np.sum((w > e1) & (w < y - tol)))

    full = s @ ((vs * inv) @ vs.T) @ s
    full = 0.5 * (full + full.T)
    total = d1 + d2 + d3
    sum_rel = np.linalg.norm(total - full) / max(np.linalg.norm(full), 1e-30)

    eig_tol = tol * max(1.0, float(np.linalg.norm(s, 2)) ** 2 / max(y - e1, tol))
    d1_max = float(np.linalg.eigvalsh(d1).max()) if d1.size else 0.0
    rank_d2 = int(np.sum(np.abs(np.linalg.eigvalsh(d2)) > eig_tol)) if d2.size else 0
    checks = {
        "d1_negative": d1_max <= eig_tol,
        "d1_max_eig": d1_max,
        "d2_rank": rank_d2,
        "d2_rank_ok": rank_d2 <= n2,
        "sum_matches": bool(sum_rel <= 1e-10),
        "sum_rel_err": float(sum_rel),
    }
    if x is not None:
        bound = bm.dense()[np.ix_(sup, sup)] / (0.5 * (y - float(x)))
        excess = float(np.linalg.eigvalsh(d3 - bound).max()) if d3.size else 0.0
        checks["d3_dominated"] = excess <= eig_tol
        checks["d3_excess"] = excess
    return BSDecomposition(d1, d2, d3, n2, checks)


# ---------------------------------------------------------------------------
# randomized verification campaigns


def _random_orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _random_psd(rng, dim, scale):
    rank = int(rng.integers(0, min(dim // 2, 8) + 1))
    if rank == 0 or scale == 0.0:
        return np.zeros((dim, dim))
    w = rng.standard_normal((dim, rank))
    m = w @ w.T * (scale / rank)
    return 0.5 * (m + m.T)


def random_gap_instance(seed, dim, gap=(-1.0, 1.0)):
    """Seeded dense instance with an engineered spectral gap.

    A = Q diag(evs) Q^T with eigenvalues on both sides of the gap (one
    exactly at each endpoint), plus independent random PSD parts B_+, B_-.
    """
    rng = np.random.default_rng(seed)
    x, y = float(gap[0]), float(gap[1])
    n_lo = int(rng.integers(1, dim))
    n_hi = dim - n_lo
    evs = np.concatenate(
        [
            [x, y],
            x - 1e-3 - 3.0 * rng.random(max(n_lo - 1, 0)),
            y + 1e-3 + 3.0 * rng.random(max(n_hi - 1, 0)),
        ]
    )
    q = _random_orthogonal(rng, dim)
    a = (q * evs) @ q.T
    a = 0.5 * (a + a.T)
    b_plus = _random_psd(rng, dim, 2.0 * rng.random())
    b_minus = _random_psd(rng, dim, 2.0 * rng.random())
    return a, b_plus, b_minus, rng


def run_bound_campaign(variant, seeds, dim_range, gap=(-1.0, 1.0), tol=None,
                       e0=None, threads=None):
    """gap_bound over seeded random instances; returns one BoundReport per seed.

    ``e0`` fixes the probe energy for every instance (default: seeded random
    position in the admissible half-gap).
    """
    x, y = float(gap[0]), float(gap[1])
    e1 = 0.5 * (x + y)
    lo, hi = int(dim_range[0]), int(dim_range[1])

    def one(seed):
        rng_dim = np.random.default_rng((int(seed), 0xD1))
        dim = int(rng_dim.integers(lo, hi + 1))
        a, bp, bm, rng = random_gap_instance(seed, dim, gap)
        if e0 is not None:
            probe = float(e0)
        elif variant in ("t11", "t31"):
            probe = x + (0.05 + 0.9 * rng.random()) * (e1 - x)
        else:
            probe = e1 + (0.05 + 0.9 * rng.random()) * (y - e1)
        return gap_bound(variant, a, bp, bm, gap, probe, tol=tol)

    return parallel_map(one, seeds, threads)


def run_prop21_campaign(seeds, dim_range, gap=(-1.0, 1.0), tol=1e-8, e=None,
                        threads=None):
    """verify_prop21 over seeded instances with PSD B.

    The mu grid per instance contains the reciprocals of the significant
    kernel eigenvalues (which must produce operator-side eigenvalues at e)
    plus displaced values (which must not).
    """
    x, y = float(gap[0]), float(gap[1])
    lo, hi = int(dim_range[0]), int(dim_range[1])

    def one(seed):
        rng_dim = np.random.default_rng((int(seed), 0xB5))
        dim = int(rng_dim.integers(lo, hi + 1))
        a, bp, _, rng = random_gap_instance(seed, dim, gap)
        if not np.any(bp):
            bp = np.eye(dim) * (0.5 + rng.random())
        probe = x + (0.1 + 0.8 * rng.random()) * (y - x) if e is None else float(e)
        kernel = bs_operator(a, bp, probe, tol=1e-6 * (y - x))
        kappa = kernel.eigenvalues()
        mus = []
        for k in kappa:
            if abs(k) > 1e-6:
                mus.append(1.0 / k)
                mus.append((1.37 + 0.1 * rng.random()) / k)
        mus.extend([0.5 + rng.random(), -0.5 - rng.random()])
        return verify_prop21(a, bp, gap, probe, mus, tol=tol)

    return parallel_map(one, seeds, threads)
