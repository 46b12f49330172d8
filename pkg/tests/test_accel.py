"""Bit-for-bit parity between the compiled kernels and the numpy
fallback, so implementation selection can never change a result."""

import numpy as np
import pytest

from intrans._accel import ACTIVE_IMPL, _purepy

_core = pytest.importorskip(
    "intrans._accel._core",
    reason="compiled extension not built; parity has nothing to compare")


def test_active_impl_reported():
    assert ACTIVE_IMPL in ("compiled", "python")
    assert _purepy.IMPL == "python"
    assert _core.IMPL == "compiled"


@pytest.mark.parametrize("n,m", [(1, 1), (5, 3), (64, 64), (257, 511)])
def test_pair_counts_parity(n, m):
    rng = np.random.default_rng(1000 + n)
    a = np.sort(rng.integers(0, 40, n).astype(np.float64))
    b = np.sort(rng.integers(0, 40, m).astype(np.float64))
    assert _core.pair_counts(a, b) == _purepy.pair_counts(a, b)


def test_pair_counts_parity_continuous():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = np.sort(rng.standard_normal(rng.integers(1, 100)))
        b = np.sort(rng.standard_normal(rng.integers(1, 100)))
        assert _core.pair_counts(a, b) == _purepy.pair_counts(a, b)


@pytest.mark.parametrize("n", [2, 3, 50, 400])
def test_mcmc_pair_transfer_parity(n):
    rng = np.random.default_rng(2000 + n)
    steps = 5000
    ii = rng.integers(0, n, steps)
    jj = rng.integers(0, n - 1, steps)
    jj[jj >= ii] += 1
    uu = rng.random(steps)
    faces_a = np.arange(1, n + 1, dtype=np.int64)
    faces_b = faces_a.copy()
    _core.mcmc_pair_transfer(faces_a, ii, jj, uu)
    _purepy.mcmc_pair_transfer(faces_b, ii, jj, uu)
    np.testing.assert_array_equal(faces_a, faces_b)
    assert faces_a.sum() == n * (n + 1) // 2
    assert faces_a.min() >= 1 and faces_a.max() <= n


def test_profile_margins_parity():
    rng = np.random.default_rng(31)
    for k in (3, 4, 5):
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        pair_a = np.array([p[0] for p in pairs], dtype=np.int64)
        pair_b = np.array([p[1] for p in pairs], dtype=np.int64)
        for _ in range(20):
            n = int(rng.integers(1, 200))
            positions = np.argsort(rng.random((n, k)), axis=1).astype(np.int64)
            got_c = _core.profile_margins(positions, pair_a, pair_b)
            got_p = _purepy.profile_margins(positions, pair_a, pair_b)
            np.testing.assert_array_equal(got_c, got_p)


def test_kernels_accept_read_only_arrays():
    """Frozen (non-writable) inputs must work in both implementations;
    ranking profiles hand out exactly such arrays."""
    a = np.sort(np.random.default_rng(32).random(50))
    b = np.sort(np.random.default_rng(33).random(50))
    a.setflags(write=False)
    b.setflags(write=False)
    positions = np.argsort(np.random.default_rng(34).random((9, 3)),
                           axis=1).astype(np.int64)
    pair_a = np.array([0, 0, 1], dtype=np.int64)
    pair_b = np.array([1, 2, 2], dtype=np.int64)
    for arr in (positions, pair_a, pair_b):
        arr.setflags(write=False)
    for mod in (_core, _purepy):
        wins, ties = mod.pair_counts(a, b)
        assert wins + ties <= 2500
        margins = mod.profile_margins(positions, pair_a, pair_b)
        assert margins.shape == (3,)


def test_env_override():
    """INTRANS_PURE_PYTHON forces the fallback in a fresh interpreter."""
    import os
    import subprocess
    import sys

    env = dict(os.environ, INTRANS_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "import intrans._accel as m; print(m.ACTIVE_IMPL)"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
