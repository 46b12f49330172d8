"""Timing comparison of the compiled kernels against the numpy fallback.

Run as `python benchmarks/bench_kernels.py`. Each kernel is timed on a
few representative sizes; the table reports the per-call median of both
implementations and the speedup. Outputs are also compared bit-for-bit,
so a parity regression shows up here as well as in the test suite.
"""

import time

import numpy as np

from intrans._accel import _purepy

try:
    from intrans._accel import _core
except ImportError:
    _core = None


def _median_time(fn, args, repeats=9, min_ms=5.0):
    """Median wall time per call, adaptively batching very fast calls."""
    batch = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(batch):
            fn(*args)
        elapsed = (time.perf_counter() - t0) * 1000.0
        if elapsed >= min_ms or batch >= 1 << 16:
            break
        batch *= 2
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(batch):
            fn(*args)
        times.append((time.perf_counter() - t0) * 1000.0 / batch)
    return sorted(times)[len(times) // 2]


def _cases():
    rng = np.random.default_rng(11)
    for n in (64, 256, 1024):
        a = np.sort(rng.standard_normal(n))
        b = np.sort(rng.standard_normal(n))
        yield "pair_counts(n=%d)" % n, "pair_counts", (a, b)
    for n in (100, 1000):
        faces = np.arange(1, n + 1, dtype=np.int64)
        steps = 20_000
        ii = rng.integers(0, n, steps)
        jj = rng.integers(0, n - 1, steps)
        jj[jj >= ii] += 1
        uu = rng.random(steps)
        yield ("mcmc_pair_transfer(n=%d, steps=%d)" % (n, steps),
               "mcmc_pair_transfer", (faces.copy(), ii, jj, uu))
    for n_voters, k in ((301, 3), (2001, 4)):
        positions = np.argsort(rng.random((n_voters, k)), axis=1)
        positions = positions.astype(np.int64)
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        pair_a = np.array([p[0] for p in pairs], dtype=np.int64)
        pair_b = np.array([p[1] for p in pairs], dtype=np.int64)
        yield ("profile_margins(n=%d, k=%d)" % (n_voters, k),
               "profile_margins", (positions, pair_a, pair_b))


def main():
    if _core is None:
        print("compiled extension not built; only timing the fallback")
    rows = []
    for label, name, args in _cases():
        pure_fn = getattr(_purepy, name)
        pure_ms = _median_time(pure_fn, args)
        if _core is not None:
            core_fn = getattr(_core, name)
            ref = pure_fn(*[np.copy(a) for a in args])
            got = core_fn(*[np.copy(a) for a in args])
            if not np.array_equal(np.asarray(ref), np.asarray(got)):
                raise AssertionError("parity mismatch in %s" % label)
            core_ms = _median_time(core_fn, args)
            rows.append((label, pure_ms, core_ms, pure_ms / core_ms))
        else:
            rows.append((label, pure_ms, None, None))
    width = max(len(r[0]) for r in rows)
    print("%-*s %12s %12s %9s" % (width, "kernel", "python (ms)",
                                  "compiled (ms)", "speedup"))
    for label, pure_ms, core_ms, ratio in rows:
        if core_ms is None:
            print("%-*s %12.4f %12s %9s" % (width, label, pure_ms, "-", "-"))
        else:
            print("%-*s %12.4f %12.4f %8.1fx"
                  % (width, label, pure_ms, core_ms, ratio))


if __name__ == "__main__":
    main()
