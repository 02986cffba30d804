"""Power sums of gap-eigenvalue distances and their convergence experiments.

For J = J0 + delta J the discrete eigenvalues off the essential spectrum E
contribute sum dist(lam, E)^alpha.  Finite sections approximate the sum;
the window schedule experiments watch it stabilize.  The step-function
identity

    sum_{lam in (lam0, lam0+eps)} f(lam)
        = integral f'(lam) #(J in (lam, lam0+eps)) dlam

is evaluated three ways (direct sum, exact breakpoint summation, adaptive
quadrature of the counting function) as a consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import inertia
from ._parallel import parallel_map
from .bands import BandSet, compute_bands
from .errors import WindowSizeError
from .green import auto_half_width, dirichlet_green_diagonal
from .operators import JacobiOperator, truncate
from .splitting import split

__all__ = [
    "GapComponent",
    "GapReport",
    "PowerFunction",
    "SumIdentityResult",
    "ConvergenceTable",
    "gap_power_sum",
    "check_sum_identity",
    "convergence_experiment",
]

DEFAULT_SUPPORT_TAU = 0.05
INSET_FACTOR = 10.0          # band-edge inset = INSET_FACTOR * tol
_QUAD_MAX_DEPTH = 48


@dataclass(frozen=True)
class GapComponent:
    label: str
    interval: tuple
    eigenvalues: np.ndarray
    distances: np.ndarray


@dataclass(frozen=True)
class GapReport:
    half_width: int
    bands: BandSet
    components: tuple
    power_sums: dict

    @property
    def count(self):
        return int(sum(c.eigenvalues.size for c in self.components))

    def total(self, alpha):
        return self.power_sums[alpha]


def gap_power_sum(op: JacobiOperator, alpha, half_width, tol=1e-10,
                  support_tol=None, inset=None) -> GapReport:
    """Locate all off-band eigenvalues of the section and sum dist^alpha.

    Eigenvalues within ``inset`` (default 10 tol) of a band edge are
    excluded: at that distance they cannot be told apart from truncation
    artifacts.  The window must cover the perturbation: the certified tail
    beyond half_width/4 has to fall below ``support_tol``.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0")
    half_width = int(half_width)
    tau = DEFAULT_SUPPORT_TAU if support_tol is None else float(support_tol)
    tail = op.perturbation.tail_bound(half_width // 4)
    if tail >= tau:
        suggested = 4 * op.perturbation.support_radius(tau)
        raise WindowSizeError(
            f"half-width {half_width} leaves perturbation tail {tail!r} >= "
            f"{tau!r} beyond a quarter window; need half-width >= {suggested}"
        )
    t = truncate(op, (-half_width, half_width))
    bandset = compute_bands(op.background)
    if inset is None:
        inset = INSET_FACTOR * inertia._default_tol(t.diag, t.offdiag, tol)
    lo, hi = t.spectrum_bracket()
    lo -= 1.0
    hi += 1.0
    components = []
    for label, (c_lo, c_hi) in bandset.off_spectrum_components(lo, hi):
        a = c_lo if label == "below" else c_lo + inset
        b = c_hi if label == "above" else c_hi - inset
        if not a < b:
            continue
        eigs = inertia.eigs_in_interval(t, (a, b), tol)
        dists = bandset.distance(eigs) if eigs.size else np.zeros(0)
        components.append(GapComponent(label, (a, b), eigs, dists))
    all_d = np.concatenate([c.distances for c in components]) if components else np.zeros(0)
    total = float(np.sum(all_d ** alpha)) if all_d.size else 0.0
    return GapReport(half_width, bandset, tuple(components), {alpha: total})


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerFunction:
    """f(lam) = (lam - lam0)^alpha on lam >= lam0 (the family the sums use)."""

    alpha: float
    lam0: float

    def __call__(self, lam):
        d = np.maximum(np.asarray(lam, dtype=float) - self.lam0, 0.0)
        out = d ** self.alpha
        return float(out) if np.ndim(lam) == 0 else out

    def derivative(self, lam):
        d = np.asarray(lam, dtype=float) - self.lam0
        out = self.alpha * d ** (self.alpha - 1.0)
        return float(out) if np.ndim(lam) == 0 else out


def _adaptive_simpson(g, a, b, tol, max_depth=_QUAD_MAX_DEPTH):
    """Adaptive Simpson with absolute tolerance; robust to step integrands
    (jump panels bottom out at max_depth with negligible width)."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    m0 = 0.5 * (a + b)
    stack = [(a, b, g(a), g(m0), g(b), tol, 0)]
    while stack:
        x0, x1, f0, fm, f1, loc_tol, depth = stack.pop()
        h = x1 - x0
        mid = 0.5 * (x0 + x1)
        lm = 0.5 * (x0 + mid)
        rm = 0.5 * (mid + x1)
        flm = g(lm)
        frm = g(rm)
        s1 = simpson(f0, fm, f1, h)
        s2 = simpson(f0, flm, fm, 0.5 * h) + simpson(fm, frm, f1, 0.5 * h)
        if depth >= max_depth or abs(s2 - s1) <= 15.0 * loc_tol:
            total += s2 + (s2 - s1) / 15.0
        else:
            stack.append((x0, mid, f0, flm, fm, 0.5 * loc_tol, depth + 1))
            stack.append((mid, x1, fm, frm, f1, 0.5 * loc_tol, depth + 1))
    return total


@dataclass(frozen=True)
class SumIdentityResult:
    lhs: float
    rhs_exact: float
    rhs_quadrature: float
    count: int
    quad_tol: float

    @property
    def max_discrepancy(self):
        return max(abs(self.lhs - self.rhs_exact),
                   abs(self.lhs - self.rhs_quadrature))


def check_sum_identity(op: JacobiOperator, lam0, eps, f_spec, half_width,
                       tol=1e-10, quad_tol=1e-8) -> SumIdentityResult:
    """Evaluate both sides of the step-function identity on a section.

    ``f_spec`` is a PowerFunction, or a (f, fprime) pair of callables with
    f(lam0) = 0 and fprime > 0 on the interval.  ``rhs_exact`` assembles the
    integral segment-by-segment between eigenvalue breakpoints;
    ``rhs_quadrature`` integrates fprime * count adaptively, with the power
    family substituted to u = f(lam) so the integrand is a bounded step.
    """
    lam0 = float(lam0)
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    if isinstance(f_spec, PowerFunction):
        f, fp = f_spec, f_spec.derivative
        if f_spec.lam0 != lam0:
            raise ValueError("PowerFunction.lam0 must equal lam0")
    else:
        f, fp = f_spec
        if abs(f(lam0)) > 1e-14:
            raise ValueError("f(lam0) must vanish")
        sample = lam0 + eps * np.linspace(1e-6, 1.0, 29)
        if not all(fp(s) > 0.0 for s in sample):
            raise ValueError("fprime must be positive on (lam0, lam0 + eps)")

    t = truncate(op, (-int(half_width), int(half_width)))
    eigs = inertia.eigs_in_interval(t, (lam0, lam0 + eps), tol)
    m = eigs.size
    lhs = float(np.sum([f(l) for l in eigs])) if m else 0.0

    # breakpoint summation: count is (m - k) on the k-th segment
    breaks = np.concatenate([[lam0], eigs, [lam0 + eps]])
    rhs_exact = 0.0
    for k in range(m):
        rhs_exact += (m - k) * (f(breaks[k + 1]) - f(breaks[k]))

    upper = lam0 + eps

    def count_at(lam):
        if lam >= upper:
            return 0
        return inertia.count_in_interval(t, (lam, upper), tol).count

    if isinstance(f_spec, PowerFunction):
        u_max = f(upper)
        alpha = f_spec.alpha
        rhs_quad = _adaptive_simpson(
            lambda u: float(count_at(lam0 + u ** (1.0 / alpha))),
            0.0, u_max, quad_tol,
        )
    else:
        delta = 1e-9 * eps
        head = count_at(lam0 + delta) * f(lam0 + delta)
        rhs_quad = head + _adaptive_simpson(
            lambda lam: fp(lam) * count_at(lam), lam0 + delta, upper, quad_tol
        )
    return SumIdentityResult(lhs, float(rhs_exact), float(rhs_quad), int(m),
                             float(quad_tol))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceTable:
    variant: str
    alpha: float
    rows: tuple               # (half_width, count, power_sum, delta)
    verdict: str
    majorant: dict | None = None
    reports: tuple = ()       # the underlying GapReport per schedule entry

    @property
    def deltas(self):
        return tuple(r[3] for r in self.rows[1:])


def _verdict(sums, tol):
    if len(sums) < 4:
        return "insufficient-data"
    deltas = [abs(sums[i + 1] - sums[i]) for i in range(len(sums) - 1)]
    last3 = deltas[-3:]
    floor = 1e-12 * (1.0 + abs(sums[-1]))
    monotone = last3[0] >= last3[1] >= last3[2]
    below_floor = all(d <= floor for d in last3)
    if all(d <= tol for d in last3) and (monotone or below_floor):
        return "stabilized"
    if monotone:
        return "slow"
    return "not-converged"


def _majorant_report(bg, pert, alpha, eps, window, tol):
    """Quadrature of f'(lam) |Tr((dJ+)^{1/2} GD(lam) (dJ+)^{1/2})| near the
    lower edge of the widest interior gap, reported at two refinements."""
    bandset = compute_bands(bg)
    gaps = bandset.interior_gaps
    if not gaps:
        return None
    widths = [hi - lo for lo, hi in gaps]
    g_lo, g_hi = gaps[int(np.argmax(widths))]
    if eps is None:
        eps = 0.25 * (g_hi - g_lo)
    lam0 = g_lo
    sp = split(pert, (-window, window))
    weights = sp.plus_diag
    sites_w = sp.sites

    def integrand(lam):
        half = max(auto_half_width(bg, lam, tol), 4 * window)
        sites, gd, _ = dirichlet_green_diagonal(bg, lam, half, tol,
                                                max_site=window)
        sel = np.searchsorted(sites, sites_w)
        tr = float(np.sum(weights * gd[sel]))
        return alpha * (lam - lam0) ** (alpha - 1.0) * abs(tr)

    def quadrature(panels_per_decade):
        decades = 5
        edges = lam0 + eps * np.geomspace(10.0 ** (-decades), 1.0,
                                          decades * panels_per_decade + 1)
        nodes, w8 = np.polynomial.legendre.leggauss(8)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.sum(w8 * [integrand(x) for x in xs]))
        return total

    v1 = quadrature(3)
    v2 = quadrature(6)
    rel = abs(v2 - v1) / max(abs(v2), 1e-300)
    return {
        "edge": float(lam0),
        "eps": float(eps),
        "value": float(v2),
        "coarse_value": float(v1),
        "rel_change": float(rel),
        "converged": bool(rel < 0.02),
        "trace_plus": float(np.sum(weights)),
    }


def convergence_experiment(variant, bg, pert, alpha, schedule, tol=1e-3, *,
                           support_tol=None, inset=None, eig_tol=1e-10,
                           log_eps=0.5, majorant_eps=None,
                           majorant_tol=1e-4, threads=None) -> ConvergenceTable:
    """Window-schedule convergence study of the distance power sums.

    variant "thm13" requires a summable family and alpha > 1/2 and also
    evaluates the trace majorant; "thm14" requires the log-weighted class
    (parameter ``log_eps``) at alpha = 1/2; "conjecture" requires a summable
    family at alpha = 1/2 and its verdict is informational evidence only.
    """
    variant = variant.lower()
    if variant == "thm13":
        if not pert.is_trace_class:
            raise ValueError("thm13 requires a summable perturbation family")
        if not alpha > 0.5:
            raise ValueError("thm13 requires alpha > 1/2")
    elif variant == "thm14":
        if not pert.satisfies_log_weight(log_eps):
            raise ValueError(
                "thm14 requires the log-weighted class at the given log_eps"
            )
        if alpha != 0.5:
            raise ValueError("thm14 is stated at alpha = 1/2")
    elif variant == "conjecture":
        if not pert.is_trace_class:
            raise ValueError("conjecture requires a summable perturbation family")
        if alpha != 0.5:
            raise ValueError("the conjectured sum has alpha = 1/2")
    else:
        raise ValueError(f"unknown variant {variant!r}")

    op = JacobiOperator(bg, pert)
    reps = parallel_map(
        lambda hw: gap_power_sum(op, alpha, int(hw), eig_tol,
                                 support_tol=support_tol, inset=inset),
        schedule, threads,
    )
    rows = []
    prev = None
    for half_width, rep in zip(schedule, reps):
        s = rep.total(alpha)
        delta = math.nan if prev is None else abs(s - prev)
        rows.append((int(half_width), rep.count, s, delta))
        prev = s
    verdict = _verdict([r[2] for r in rows], tol)
    majorant = None
    if variant == "thm13":
        window = min(int(schedule[-1]), 400)
        majorant = _majorant_report(bg, pert, alpha, majorant_eps, window,
                                    majorant_tol)
    return ConvergenceTable(variant, float(alpha), tuple(rows), verdict,
                            majorant, tuple(reps))
