"""Distance power sums, the step-function identity, convergence tables."""

import numpy as np
import pytest
import scipy.linalg as sla

from gapcount import ltsums
from gapcount.errors import WindowSizeError
from gapcount.ltsums import PowerFunction
from gapcount.operators import (
    JacobiOperator,
    PeriodicBackground,
    free_background,
    make_perturbation,
    truncate,
)

P2 = PeriodicBackground(2, (1.0, 1.0), (1.0, -1.0))
THM13_PERT = make_perturbation("power", b_amp=2.0, b_exp=1.5, b_alternating=True)


def test_unperturbed_background_has_empty_sums():
    rep = ltsums.gap_power_sum(JacobiOperator(P2), 0.5, 200)
    assert rep.count == 0
    assert rep.total(0.5) == 0.0


def test_impurity_power_sum_analytic():
    op = JacobiOperator(free_background(),
                        make_perturbation("finite", sites=[(0, 0.0, 1.5)]))
    rep = ltsums.gap_power_sum(op, 0.5, 1000, 1e-8)
    assert rep.count == 1
    assert rep.total(0.5) == pytest.approx(np.sqrt(0.5), abs=1e-5)
    (comp,) = [c for c in rep.components if c.eigenvalues.size]
    assert comp.label == "above"


def test_sums_match_dense_eigendecomposition():
    op = JacobiOperator(P2, THM13_PERT)
    alpha = 0.6
    rep = ltsums.gap_power_sum(op, alpha, 200, support_tol=1.7)
    t = truncate(op, (-200, 200))
    w = sla.eigh_tridiagonal(np.asarray(t.diag), np.asarray(t.offdiag),
                             eigvals_only=True)
    bset = rep.bands
    dists = bset.distance(w)
    inset = ltsums.INSET_FACTOR * 1e-10 * t.norm_bound()
    dense_sum = float(np.sum(dists[dists > inset] ** alpha))
    assert rep.total(alpha) == pytest.approx(dense_sum, abs=1e-8)


def test_power_sum_monotone_in_alpha():
    # asserted only when every distance is <= 1 (then d^a is decreasing in a)
    pert = make_perturbation("power", b_amp=1.0, b_exp=2.0, b_alternating=True)
    op = JacobiOperator(P2, pert)
    r1 = ltsums.gap_power_sum(op, 0.55, 150, support_tol=0.06)
    r2 = ltsums.gap_power_sum(op, 0.9, 150, support_tol=0.06)
    max_dist = max(
        (c.distances.max() for c in r1.components if c.distances.size), default=0.0
    )
    assert 0.0 < max_dist <= 1.0
    assert r1.total(0.55) >= r2.total(0.9)


def test_window_precondition():
    with pytest.raises(WindowSizeError):
        # default support tolerance rejects a fat tail on a small window
        ltsums.gap_power_sum(JacobiOperator(P2, THM13_PERT), 0.6, 100)
    with pytest.raises(ValueError):
        ltsums.gap_power_sum(JacobiOperator(P2), -0.5, 100)


SUMCHECK_OP = JacobiOperator(
    P2, make_perturbation("finite", sites=[(0, 0.0, -2.5)])
)


def test_sum_identity_no_eigenvalues():
    res = ltsums.check_sum_identity(JacobiOperator(P2), -1.0, 1.0,
                                    PowerFunction(0.6, -1.0), 200)
    assert res.count == 0
    assert res.lhs == res.rhs_exact == res.rhs_quadrature == 0.0


def test_sum_identity_alpha_one_is_algebraic():
    res = ltsums.check_sum_identity(SUMCHECK_OP, -1.0, 1.0,
                                    PowerFunction(1.0, -1.0), 300)
    assert res.count >= 1
    assert abs(res.lhs - res.rhs_exact) <= 1e-12 * (1.0 + abs(res.lhs))


def test_sum_identity_power_and_quadrature():
    res = ltsums.check_sum_identity(SUMCHECK_OP, -1.0, 1.0,
                                    PowerFunction(0.6, -1.0), 300)
    assert abs(res.lhs - res.rhs_exact) <= 1e-10 * (1.0 + abs(res.lhs))
    assert abs(res.lhs - res.rhs_quadrature) <= 1e-6


def test_sum_identity_explicit_f():
    f = lambda lam: np.expm1(lam + 1.0)
    fp = lambda lam: np.exp(lam + 1.0)
    res = ltsums.check_sum_identity(SUMCHECK_OP, -1.0, 1.0, (f, fp), 300)
    assert abs(res.lhs - res.rhs_exact) <= 1e-10 * (1.0 + abs(res.lhs))
    assert abs(res.lhs - res.rhs_quadrature) <= 1e-6


def test_sum_identity_rejects_bad_f():
    g = lambda lam: lam + 1.0      # g(lam0) != 0 for lam0 = 0
    gp = lambda lam: 1.0
    with pytest.raises(ValueError):
        ltsums.check_sum_identity(SUMCHECK_OP, 0.0, 0.5, (g, gp), 100)
    f = lambda lam: -(lam + 1.0)   # decreasing
    fp = lambda lam: -1.0
    with pytest.raises(ValueError):
        ltsums.check_sum_identity(SUMCHECK_OP, -1.0, 1.0, (f, fp), 100)


def test_convergence_thm13_shipped_config():
    table = ltsums.convergence_experiment(
        "thm13", P2, THM13_PERT, 0.6, (100, 200, 400, 800), tol=0.05,
        support_tol=1.7,
    )
    assert table.verdict == "stabilized"
    deltas = table.deltas
    floor = 1e-12 * (1.0 + table.rows[-1][2])
    real = [d for d in deltas if d > floor]
    assert all(a / b >= 1.5 for a, b in zip(real, real[1:]))
    # oracle: dense eigendecompositions at the two smallest windows
    for half_width, count, total, _ in table.rows[:2]:
        t = truncate(JacobiOperator(P2, THM13_PERT), (-half_width, half_width))
        w = sla.eigh_tridiagonal(np.asarray(t.diag), np.asarray(t.offdiag),
                                 eigvals_only=True)
        d = table.reports[0].bands.distance(w)
        inset = ltsums.INSET_FACTOR * 1e-10 * t.norm_bound()
        keep = d > inset
        assert int(np.sum(keep)) == count
        assert float(np.sum(d[keep] ** 0.6)) == pytest.approx(total, abs=1e-8)
    assert table.majorant is not None
    assert table.majorant["converged"]
    assert table.majorant["value"] > 0.0


def test_convergence_beta2_with_edge_inset():
    # the inverse-square perturbation resolves a pair of near-edge states
    # (dist ~ 5e-6) only beyond half-width 800; with a 1e-4 edge inset the
    # captured functional is stabilized at machine level from the start
    pert = make_perturbation("power", b_amp=1.0, b_exp=2.0, b_alternating=True)
    table = ltsums.convergence_experiment(
        "thm13", P2, pert, 0.6, (100, 200, 400, 800), tol=1e-5,
        support_tol=0.09, inset=1e-4,
    )
    assert table.verdict == "stabilized"
    floor = 1e-12 * (1.0 + abs(table.rows[-1][2]))
    assert all(d <= floor for d in table.deltas)


def test_convergence_conjecture_informational():
    table = ltsums.convergence_experiment(
        "conjecture", P2, THM13_PERT, 0.5, (100, 200, 400, 800), tol=0.05,
        support_tol=1.7,
    )
    assert table.majorant is None
    assert table.verdict in ("stabilized", "slow", "not-converged")
    assert len(table.rows) == 4


def test_convergence_thm14():
    pert = make_perturbation("logweight", b_amp=2.0, b_logexp=3.0)
    table = ltsums.convergence_experiment(
        "thm14", P2, pert, 0.5, (100, 200, 400, 800), tol=0.05,
        support_tol=0.45, log_eps=0.5,
    )
    assert table.verdict in ("stabilized", "slow")


def test_convergence_validates_families():
    weak = make_perturbation("logweight", b_amp=1.0, b_logexp=2.0)
    with pytest.raises(ValueError):
        ltsums.convergence_experiment("thm14", P2, weak, 0.5, (50, 100), log_eps=0.5)
    with pytest.raises(ValueError):
        ltsums.convergence_experiment("thm13", P2, THM13_PERT, 0.5, (50, 100))
    bad = make_perturbation("power", b_amp=1.0, b_exp=1.0, allow_non_summable=True)
    with pytest.raises(ValueError):
        ltsums.convergence_experiment("thm13", P2, bad, 0.6, (50, 100))
    with pytest.raises(ValueError):
        ltsums.convergence_experiment("conjecture", P2, THM13_PERT, 0.6, (50, 100))


def test_majorant_integrand_edge_envelope():
    # |Tr((dJ+)^{1/2} GD (dJ+)^{1/2})| <= C |lam - lam0|^{-1/2} trace(dJ+)
    # with a modest empirical C, at an edge where site 0 is nonresonant
    from gapcount.bands import band_edge_solution
    from gapcount.green import dirichlet_green_diagonal
    from gapcount.splitting import split

    bg = PeriodicBackground(2, (1.0, 1.0), (-1.0, 1.0))
    assert 0 not in band_edge_solution(bg, -1.0).resonance_sites
    sp = split(THM13_PERT, (-100, 100))
    fitted = []
    for t in (1e-2, 1e-3, 1e-4, 1e-5):
        sites, gd, _ = dirichlet_green_diagonal(bg, -1.0 + t, None, 1e-4,
                                                max_site=100)
        sel = np.searchsorted(sites, sp.sites)
        tr = abs(float(np.sum(sp.plus_diag * gd[sel])))
        fitted.append(tr * np.sqrt(t) / sp.trace_plus())
    assert max(fitted) <= 10.0


def test_schedule_threads_deterministic():
    t1 = ltsums.convergence_experiment("thm13", P2, THM13_PERT, 0.6,
                                       (100, 200, 400), tol=0.05,
                                       support_tol=1.7)
    t2 = ltsums.convergence_experiment("thm13", P2, THM13_PERT, 0.6,
                                       (100, 200, 400), tol=0.05,
                                       support_tol=1.7, threads=3)
    assert t1.rows == t2.rows
