"""Green's functions, the site-0 Dirichlet variant, edge scaling scans."""

import numpy as np
import pytest

from gapcount import green
from gapcount.errors import ResolventProximityError, ResonanceError, WindowSizeError
from gapcount.operators import PeriodicBackground, free_background

P2 = PeriodicBackground(2, (1.0, 1.0), (1.0, -1.0))
FREE = free_background()


def test_free_values_against_closed_form():
    # lam = 2.5 gives x = 1/2: G(n, m) = x^{|n-m|} / (x - 1/x)
    assert green.green_function(FREE, 0, 0, 2.5, tol=1e-8) == pytest.approx(
        -2.0 / 3.0, abs=1e-6
    )
    assert green.green_function(FREE, 1, 0, 2.5, tol=1e-8) == pytest.approx(
        -1.0 / 3.0, abs=1e-6
    )
    assert green.free_green(FREE, 0, 0, 2.5) == pytest.approx(-2.0 / 3.0, rel=1e-14)
    assert green.free_green(FREE, 3, 1, 2.5) == pytest.approx(
        0.25 / (0.5 - 2.0), rel=1e-14
    )


def test_solve_matches_free_formula_on_pairs():
    rng = np.random.default_rng(2)
    for _ in range(8):
        n, m = rng.integers(-6, 7, 2)
        lam = rng.uniform(2.2, 4.0) * rng.choice([-1.0, 1.0])
        got = green.green_function(FREE, int(n), int(m), lam, tol=1e-10)
        want = green.free_green(FREE, int(n), int(m), lam)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_resolvent_identity_residual():
    # (J0 - lam) G(., m) = delta_m on interior sites
    lam = 0.35  # inside the gap of P2
    sites, col = green.green_column(P2, 2, lam, tol=1e-10)
    diag = np.asarray(P2.b, dtype=float)[sites % 2] - lam
    res = diag * col
    res[:-1] += col[1:]
    res[1:] += col[:-1]
    half = (sites.size - 1) // 2
    expected = np.zeros_like(res)
    expected[half + 2] = 1.0
    interior = slice(1, -1)
    assert np.max(np.abs(res[interior] - expected[interior])) <= 1e-8


def test_green_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n, m = rng.integers(-5, 6, 2)
        a = green.green_function(P2, int(n), int(m), 0.3, tol=1e-10)
        b = green.green_function(P2, int(m), int(n), 0.3, tol=1e-10)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_dirichlet_zero_column():
    for m in (-3, 0, 2):
        assert green.dirichlet_green(FREE, 0, m, 2.5) == pytest.approx(0.0, abs=1e-12)


def test_dirichlet_value_and_symmetry():
    assert green.dirichlet_green(FREE, 1, 1, 2.5) == pytest.approx(-0.5, abs=1e-6)
    a = green.dirichlet_green(P2, 3, -2, 0.25)
    b = green.dirichlet_green(P2, -2, 3, 0.25)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_dirichlet_diagonal_matches_entrywise():
    sites, gd, _ = green.dirichlet_green_diagonal(P2, 0.3, tol=1e-10)
    half = (sites.size - 1) // 2
    for n in (-4, -1, 2, 5):
        want = green.dirichlet_green(P2, n, n, 0.3, tol=1e-10)
        assert gd[n + half] == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_truncation_stability_under_doubling():
    h = green.auto_half_width(P2, 0.3, 1e-8)
    v1 = green.green_function(P2, 1, 0, 0.3, half_width=h, tol=1e-8)
    v2 = green.green_function(P2, 1, 0, 0.3, half_width=2 * h, tol=1e-8)
    assert abs(v1 - v2) < 1e-8


def test_window_size_errors():
    with pytest.raises(WindowSizeError):
        green.green_function(FREE, 0, 0, 2.5, half_width=4, tol=1e-10)
    with pytest.raises(WindowSizeError):
        # sites beyond a quarter of the window
        green.green_function(FREE, 30, 0, 2.5, half_width=40, tol=1e-3)


def test_band_energy_rejected():
    with pytest.raises(ResolventProximityError):
        green.green_function(FREE, 0, 0, 1.0)
    with pytest.raises(ResolventProximityError):
        green.free_green(FREE, 0, 0, 1.0)


def test_auto_half_width_grows_with_accuracy():
    h1 = green.auto_half_width(P2, 0.9, 1e-4)
    h2 = green.auto_half_width(P2, 0.9, 1e-10)
    assert h2 > h1


def test_resonance_error_at_dirichlet_eigenvalue():
    # for this background G(0,0) crosses zero inside the gap: the gap
    # eigenvalue of the operator decoupled at site 0
    bg = PeriodicBackground(2, (1.0, 0.4), (0.8, -0.8))
    gap = green._bands_for(bg).interior_gaps[0]
    lam_star = green.dirichlet_site_eigenvalue(bg, gap)
    assert lam_star is not None
    assert gap[0] < lam_star < gap[1]
    with pytest.raises(ResonanceError):
        green.dirichlet_green(bg, 1, 1, lam_star, tol=1e-6)
    # P2 has no such zero: G(0,0) keeps one sign across its gap
    assert green.dirichlet_site_eigenvalue(P2, (-1.0, 1.0)) is None


def test_evaluate_green_batch():
    ev = green.evaluate_green(FREE, [(0, 0), (1, 0), (1, 1)], 2.5, tol=1e-8)
    assert ev.value(0, 0) == pytest.approx(-2.0 / 3.0, abs=1e-6)
    assert ev.value(1, 0) == pytest.approx(-1.0 / 3.0, abs=1e-6)
    assert ev.method == "solve"


def test_free_edge_scaling_constant():
    # |G(0,0; lam)| (lam - 2)^{1/2} -> 1/2 at the free upper edge
    for t in (1e-3, 1e-5):
        v = green.green_function(FREE, 0, 0, 2.0 + t, tol=1e-4)
        assert abs(v) * np.sqrt(t) == pytest.approx(0.5, rel=0.05)


def test_scan_green_bounds_small():
    rep = green.scan_green_bounds(P2, (-1.0, 1.0), edge="upper", grid_points=20,
                                  decades=4, n_range=800, tol=1e-3)
    assert rep.all_bounded
    assert set(rep.slopes) == {"c52", "c54", "c55"}
    # envelope property: the fitted constants dominate pointwise
    c54 = max(r[4] for r in rep.rows)
    c55 = max(r[5] for r in rep.rows)
    for t, lam, half, q52, q54, q55 in rep.rows:
        sel_sites, gd, _ = green.dirichlet_green_diagonal(
            P2, lam, half, 1e-3, max_site=50
        )
        hw = (sel_sites.size - 1) // 2
        for n in (1, 7, 30):
            val = abs(gd[n + hw])
            envelope = min(c54 * (abs(n) + 1.0), c55 / np.sqrt(t))
            assert val <= envelope * (1.0 + 1e-9)


def test_scan_threads_deterministic():
    a = green.scan_green_bounds(P2, (-1.0, 1.0), edge="upper", grid_points=6,
                                decades=2, n_range=60, tol=1e-3)
    b = green.scan_green_bounds(P2, (-1.0, 1.0), edge="upper", grid_points=6,
                                decades=2, n_range=60, tol=1e-3, threads=3)
    assert a.rows == b.rows
