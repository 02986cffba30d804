"""Band structure of periodic Jacobi backgrounds via the Floquet discriminant.

The one-period transfer matrix at energy lam maps (u_0, u_{-1}) to
(u_p, u_{p-1}) along solutions of a_n u_{n+1} + b_n u_n + a_{n-1} u_{n-1}
= lam u_n.  Its trace Delta(lam) is a degree-p polynomial; the essential
spectrum is {lam : |Delta(lam)| <= 2}.  Band edges are located by bisection
on Delta -/+ 2 over brackets from a coarse grid; the exact polynomial form
supplies Delta' and flags degenerate (closed-gap) touch points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import NumericalError, RootFindingError
from .operators import PeriodicBackground

__all__ = [
    "BandSet",
    "BandEdgeSolution",
    "monodromy",
    "discriminant",
    "discriminant_polynomial",
    "compute_bands",
    "band_edge_solution",
]

RESONANCE_RTOL = 1e-8
_GRID_POINTS = 1001


@dataclass(frozen=True)
class BandSet:
    """Closed disjoint bands [l_j, r_j] and their complementary gaps."""

    bands: tuple
    degenerate_points: tuple = ()

    @property
    def interior_gaps(self):
        """Finite open gaps between consecutive bands."""
        return tuple(
            (self.bands[j][1], self.bands[j + 1][0])
            for j in range(len(self.bands) - 1)
        )

    @property
    def gaps(self):
        """All open complementary intervals, including the two unbounded rays."""
        lo = (-np.inf, self.bands[0][0])
        hi = (self.bands[-1][1], np.inf)
        return (lo,) + self.interior_gaps + (hi,)

    def distance(self, lam):
        """dist(lam, E) where E is the union of bands."""
        lam = np.asarray(lam, dtype=float)
        d = np.full(lam.shape, np.inf)
        for lo, hi in self.bands:
            d = np.minimum(d, np.where(lam < lo, lo - lam, np.where(lam > hi, lam - hi, 0.0)))
        return float(d) if d.ndim == 0 else d

    def contains(self, lam, tol=0.0):
        return bool(self.distance(lam) <= tol)

    def off_spectrum_components(self, lower, upper):
        """Open components of [lower, upper] \\ E, labelled for reporting."""
        comps = [("below", (lower, self.bands[0][0]))]
        for j, (g_lo, g_hi) in enumerate(self.interior_gaps):
            comps.append((f"gap{j}", (g_lo, g_hi)))
        comps.append(("above", (self.bands[-1][1], upper)))
        return comps


@dataclass(frozen=True)
class BandEdgeSolution:
    """(Anti)periodic solution (J0 - edge) u = 0 over one period.

    u holds u_0 .. u_p normalized to max |u| = 1; u_{n+p} = multiplier * u_n.
    Sites n in [0, p) with |u_n| below RESONANCE_RTOL * max|u| are resonance
    points.
    """

    edge: float
    u: np.ndarray
    floquet_multiplier: int
    resonance_sites: frozenset


def monodromy(bg: PeriodicBackground, lam):
    """One-period transfer matrix at energy lam (det = 1)."""
    lam = np.asarray(lam, dtype=float)
    m00 = np.ones_like(lam)
    m01 = np.zeros_like(lam)
    m10 = np.zeros_like(lam)
    m11 = np.ones_like(lam)
    p = bg.period
    for n in range(p):
        a_n = bg.a_at(n)
        a_prev = bg.a_at(n - 1)
        t00 = (lam - bg.b_at(n)) / a_n
        t01 = -a_prev / a_n
        n00 = t00 * m00 + t01 * m10
        n01 = t00 * m01 + t01 * m11
        m00, m01, m10, m11 = n00, n01, m00, m01
    return m00, m01, m10, m11


def discriminant(bg: PeriodicBackground, lam):
    """Floquet discriminant Delta(lam); |Delta| <= 2 exactly on bands."""
    m00, _, _, m11 = monodromy(bg, lam)
    tr = m00 + m11
    return float(tr) if np.ndim(tr) == 0 else tr


def discriminant_polynomial(bg: PeriodicBackground) -> Polynomial:
    """Delta as an exact polynomial in lam (degree p, leading coeff 1/prod a)."""
    one = Polynomial([1.0])
    zero = Polynomial([0.0])
    m = [[one, zero], [zero, one]]
    for n in range(bg.period):
        a_n = bg.a_at(n)
        a_prev = bg.a_at(n - 1)
        t00 = Polynomial([-bg.b_at(n) / a_n, 1.0 / a_n])
        t01 = Polynomial([-a_prev / a_n])
        m = [
            [t00 * m[0][0] + t01 * m[1][0], t00 * m[0][1] + t01 * m[1][1]],
            [m[0][0], m[0][1]],
        ]
    return m[0][0] + m[1][1]


def floquet_multiplier_magnitude(bg: PeriodicBackground, lam):
    """|x| of the Floquet multiplier inside the unit disk; 1.0 on bands."""
    d = np.abs(discriminant(bg, lam))
    d = np.asarray(d, dtype=float)
    half = d / 2.0
    inside = np.where(d > 2.0, half - np.sqrt(np.maximum(half * half - 1.0, 0.0)), 1.0)
    return float(inside) if inside.ndim == 0 else inside


def _bracket_roots(bg, grid, vals, target, tol):
    roots = []
    h = vals - target
    for i in range(len(grid) - 1):
        if h[i] == 0.0:
            roots.append(float(grid[i]))
        elif h[i] * h[i + 1] < 0.0:
            try:
                r = brentq(
                    lambda x: discriminant(bg, x) - target,
                    grid[i],
                    grid[i + 1],
                    xtol=tol,
                    rtol=4.0 * np.finfo(float).eps,
                )
            except (ValueError, RuntimeError) as exc:
                raise RootFindingError(
                    f"band-edge root finder failed for Delta = {target} in "
                    f"bracket [{grid[i]!r}, {grid[i + 1]!r}]"
                ) from exc
            roots.append(float(r))
    if h[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def compute_bands(bg: PeriodicBackground, tol=1e-10) -> BandSet:
    """Locate bands as maximal runs with |Delta| <= 2.

    Edges are bisection roots of Delta = +/-2; the coarse bracket grid is
    refined (x16, twice) until the root count stabilizes.  Critical points
    of Delta with |Delta| = 2 are tangencies (closed gaps): they produce no
    sign change, so the adjoining bands merge, and the touch point is
    reported in ``degenerate_points``.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    lo, hi = bg.spectrum_bounds()
    pad = 0.01 * (hi - lo) + 1e-6
    lo, hi = lo - pad, hi + pad

    def find(npts):
        grid = np.linspace(lo, hi, npts)
        vals = discriminant(bg, grid)
        vals = np.atleast_1d(vals)
        edges = []
        for target in (2.0, -2.0):
            edges.extend(_bracket_roots(bg, grid, vals, target, tol))
        return sorted(edges)

    edges = find(_GRID_POINTS)
    for factor in (16, 256):
        finer = find((_GRID_POINTS - 1) * factor + 1)
        if len(finer) == len(edges):
            break
        edges = finer
    else:
        raise RootFindingError(
            "band-edge count did not stabilize under grid refinement; "
            f"last counts {len(edges)} vs finer grid"
        )

    # cluster duplicates (a root can be found from both targets only at
    # degenerate points, and adjacent brackets can repeat a root to tol)
    scale = max(abs(lo), abs(hi), 1.0)
    cluster = max(4.0 * tol, 1e-13 * scale)
    merged = []
    for e in edges:
        if merged and abs(e - merged[-1]) <= cluster:
            merged[-1] = 0.5 * (merged[-1] + e)
        else:
            merged.append(e)

    # a root with band on both sides (or neither) is a tangency of Delta
    # with +/-2, i.e. a closed gap, not an edge; gaps narrower than the
    # probe step are folded into the same category
    probe = max(1e-7 * (hi - lo), 10.0 * cluster)
    true_edges = []
    degenerate = []
    for r in merged:
        left_in = abs(discriminant(bg, r - probe)) < 2.0
        right_in = abs(discriminant(bg, r + probe)) < 2.0
        if left_in != right_in:
            true_edges.append(r)
        else:
            degenerate.append(r)
    if len(true_edges) % 2 != 0 or not true_edges:
        raise RootFindingError(
            f"expected an even number of band edges, found {len(true_edges)}: "
            f"{true_edges}"
        )

    bands = []
    for j in range(0, len(true_edges) - 1):
        e_lo, e_hi = true_edges[j], true_edges[j + 1]
        # sample off-center too: the midpoint may be a degenerate touch point
        samples = (0.25, 0.5, 0.75)
        if any(
            abs(discriminant(bg, e_lo + s * (e_hi - e_lo))) < 2.0 for s in samples
        ):
            bands.append((e_lo, e_hi))
    if len(bands) > bg.period:
        raise RootFindingError(
            f"found {len(bands)} bands for period {bg.period}"
        )

    # tangencies without a sign change leave no bracketed root at all;
    # recover them from the critical points of the exact polynomial
    poly = discriminant_polynomial(bg)
    if bg.period > 1:
        for r in poly.deriv().roots():
            if abs(r.imag) > 1e-8 * (1.0 + abs(r.real)):
                continue
            lam_c = float(r.real)
            if abs(abs(discriminant(bg, lam_c)) - 2.0) <= max(100.0 * tol, 1e-9):
                if all(abs(lam_c - e) > cluster for e in true_edges) and all(
                    abs(lam_c - d) > max(cluster, probe) for d in degenerate
                ):
                    degenerate.append(lam_c)
    return BandSet(tuple(bands), tuple(sorted(degenerate)))


def band_edge_solution(bg: PeriodicBackground, edge, tol=1e-8) -> BandEdgeSolution:
    """The unique bounded solution direction at a band edge.

    At |Delta| = 2 the monodromy has the double eigenvalue sigma =
    sign(Delta); its eigenvector (unique also in the Jordan case) gives
    (u_0, u_{-1}), from which one period is propagated by the three-term
    recurrence.
    """
    d0 = discriminant(bg, edge)
    if abs(abs(d0) - 2.0) > max(tol, 1e-12) * 10.0:
        raise ValueError(
            f"lam = {edge!r} is not a band edge: |Delta| = {abs(d0)!r} != 2"
        )
    sigma = 1 if d0 > 0 else -1
    m00, m01, m10, m11 = monodromy(bg, float(edge))
    # kernel vector of (M - sigma): rows give (B01, -B00) or (B11, -B10)
    cand1 = np.array([m01, -(m00 - sigma)])
    cand2 = np.array([m11 - sigma, -m10])
    v = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    if np.linalg.norm(v) == 0.0:
        # monodromy equals sigma * identity (closed gap): every direction works
        v = np.array([1.0, 0.0])
    u_prev = v[1]  # u_{-1}
    u = np.empty(bg.period + 1)
    u[0] = v[0]
    for n in range(bg.period):
        u_next = ((edge - bg.b_at(n)) * u[n] - bg.a_at(n - 1) * u_prev) / bg.a_at(n)
        u_prev = u[n]
        u[n + 1] = u_next
    umax = np.max(np.abs(u))
    u = u / umax
    for val in u:
        if val != 0.0:
            if val < 0.0:
                u = -u
            break
    res = frozenset(
        int(n) for n in range(bg.period) if abs(u[n]) < RESONANCE_RTOL
    )
    for n in res:
        if (n + 1) % bg.period in res:
            raise NumericalError(
                "two consecutive resonance sites detected; edge solution "
                "is numerically degenerate"
            )
    return BandEdgeSolution(float(edge), u, sigma, res)
