"""Benchmark: compiled Cython core vs the pure-Python twin.

Times the four hot kernels on both backends and prints a comparison
table. Run as  python benchmarks/bench_backends.py  [--quick].
"""

import argparse
import math
import sys
import time

import numpy as np

from conespec import _corepy

try:
    from conespec import _core
except ImportError:
    _core = None


def timeit(fn, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bessel(core, n_eval):
    rng = np.random.default_rng(0)
    nus = rng.uniform(0.0, 40.0, n_eval)
    xs = np.exp(rng.uniform(math.log(1e-2), math.log(500.0), n_eval))

    def run():
        total = 0.0
        for nu, x in zip(nus, xs):
            total += core.bessel_jy_scaled(nu, x)[0]
        return total

    return timeit(run)


def bench_mode_sum(core, n_eval):
    nus = np.ascontiguousarray(np.arange(16) + 0.5)
    pis = np.ascontiguousarray((2 * np.arange(16) + 1) / (4 * math.pi))
    lams = np.linspace(0.01, 2.0, n_eval)

    def run():
        total = 0.0
        for lam in lams:
            total += core.density_pair_sum(nus, pis, lam, lam * 1.3)
        return total

    return timeit(run)


def bench_ql(core, n):
    d = 2.0 * np.ones(n)
    e = -1.0 * np.ones(n - 1)
    return timeit(lambda: core.ql_eigen(d, e, True), repeat=1)


def bench_ode(core, n_solve):
    def run():
        for k in range(n_solve):
            lam = 0.5 + 0.01 * k
            y0 = [1e-4, 1.5e-1, 0.0, 0.0]
            core.integrate_radial(2.0, lam * lam, 1, [1.5, 0.5, 0.4],
                                  np.zeros(1), np.zeros(4), 1e-3, y0,
                                  [1.0, 2.0, 4.0], 1e-10, 1e-14)

    return timeit(run)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args(argv)
    scale = 0.2 if args.quick else 1.0
    cases = [
        ("bessel J/Y (scaled), {} evals".format(int(20000 * scale)),
         lambda c: bench_bessel(c, int(20000 * scale))),
        ("density mode sum, {} lambda".format(int(4000 * scale)),
         lambda c: bench_mode_sum(c, int(4000 * scale))),
        ("QL tridiagonal eigensolve, n={}".format(int(600 * scale)),
         lambda c: bench_ql(c, int(600 * scale))),
        ("radial DP5 solves, {}".format(int(200 * scale)),
         lambda c: bench_ode(c, int(200 * scale))),
    ]
    print(f"{'kernel':45s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fn in cases:
        t_py = fn(_corepy)
        if _core is not None:
            t_c = fn(_core)
            print(f"{name:45s} {t_py:9.3f}s {t_c:9.3f}s {t_py / t_c:7.1f}x")
        else:
            print(f"{name:45s} {t_py:9.3f}s {'n/a':>10s} {'':>8s}")
    if _core is None:
        print("compiled core not available; showing pure-Python times only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
