"""Compiled and pure kernel backends must agree bit for bit."""

import numpy as np
import pytest

from gapcount import kernels
from gapcount.kernels import _pykernels

try:
    from gapcount.kernels import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="extension not built")


def _random_tridiag(rng, n):
    return rng.standard_normal(n), rng.standard_normal(n - 1)


def test_backend_selected():
    assert kernels.IMPLEMENTATION in ("cython", "python")


@needs_ext
def test_count_below_backends_agree():
    rng = np.random.default_rng(7)
    for n in (2, 3, 17, 200):
        diag, off = _random_tridiag(rng, n)
        shifts = np.sort(rng.standard_normal(23)) * 3.0
        c1, h1 = _ckernels.count_below(diag, off, shifts, 1e-280)
        c2, h2 = _pykernels.count_below(diag, off, shifts, 1e-280)
        np.testing.assert_array_equal(c1, c2)
        np.testing.assert_array_equal(h1, h2)


@needs_ext
def test_resolvent_diagonal_backends_agree():
    rng = np.random.default_rng(8)
    diag, off = _random_tridiag(rng, 150)
    diag += 6.0  # keep it safely nonsingular
    r1 = _ckernels.resolvent_diagonal(diag, off, 1e-280)
    r2 = _pykernels.resolvent_diagonal(diag, off, 1e-280)
    np.testing.assert_allclose(r1, r2, rtol=1e-13)


@pytest.mark.parametrize("backend", [b for b in (_ckernels, _pykernels) if b])
def test_count_below_matches_dense(backend):
    rng = np.random.default_rng(9)
    diag, off = _random_tridiag(rng, 60)
    t = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    w = np.linalg.eigvalsh(t)
    shifts = np.linspace(w.min() - 0.5, w.max() + 0.5, 31)
    counts, _ = backend.count_below(diag, off, shifts, 1e-280)
    expected = np.array([np.sum(w < s) for s in shifts])
    np.testing.assert_array_equal(counts, expected)


@pytest.mark.parametrize("backend", [b for b in (_ckernels, _pykernels) if b])
def test_resolvent_diagonal_matches_inverse(backend):
    rng = np.random.default_rng(10)
    diag, off = _random_tridiag(rng, 40)
    diag += 5.0
    t = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    expected = np.diag(np.linalg.inv(t))
    got = backend.resolvent_diagonal(diag, off, 1e-280)
    np.testing.assert_allclose(got, expected, rtol=1e-10)


@pytest.mark.parametrize("backend", [b for b in (_ckernels, _pykernels) if b])
def test_breakdown_flag_on_exact_pivot(backend):
    # shift exactly on the eigenvalue of a 1x1 leading block
    diag = np.array([1.0, 2.0])
    off = np.array([0.0])
    counts, hit = backend.count_below(diag, off, np.array([1.0]), 1e-280)
    assert bool(hit[0])
    # the zero pivot counts as below (tie resolves downward)
    assert counts[0] == 1
