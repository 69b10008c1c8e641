"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from triad_charts import _kernels_py, kernels
from triad_charts.kepler import MassConfig
from triad_charts.rpspi import DomainParams
from triad_charts.secular import body_tables


def best_of(f, n=3):
    ts = []
    for _ in range(n):
        t = time.perf_counter()
        out = f()
        ts.append(time.perf_counter() - t)
    return min(ts), out


def main():
    m = MassConfig()
    rng = np.random.default_rng(0)
    z = DomainParams().sample(m, 64, rng).as_array()
    x1, y1, x2, y2 = body_tables("rps_pi", z, m, 128)
    kd, ki = m.mbar1 * m.mbar2, 1 / m.m0
    print(f"compiled backend: {kernels.BACKEND}")
    args = [np.ascontiguousarray(a) for a in (x1, y1, x2, y2)]
    tp, rp = best_of(lambda: kernels.pair_average(*args, kd, ki, impl=_kernels_py))
    tc, rc = best_of(lambda: kernels.pair_average(*args, kd, ki))
    print(f"pair_average 64 x 128^2: python {tp:.4f} s, active {tc:.4f} s, "
          f"speedup {tp / tc:.1f}, max diff {np.abs(rp - rc).max():.2e}")
    z0 = np.array([0.0, 1.0, 0.0, 0.0, 0.05 / np.sqrt(20), 0.0,
                   1.0, 0.0, 0.0, -20.0, 0.0, 0.0])
    n = 20000
    dt = 2 * np.pi / 256
    w = (1.0,)
    tp, sp = best_of(lambda: kernels.wh_run(z0, m.mbar1, m.mbar2, m.M1, m.M2, m.mu, m.m0,
                                            dt, n, n, w, impl=_kernels_py), 1)
    tc, sc = best_of(lambda: kernels.wh_run(z0, m.mbar1, m.mbar2, m.M1, m.M2, m.mu, m.m0,
                                            dt, n, n, w))
    print(f"wh_run {n} steps: python {tp:.3f} s, active {tc:.4f} s, speedup {tp / tc:.0f}, "
          f"max diff {np.abs(sp[0] - sc[0]).max():.2e}")


if __name__ == "__main__":
    main()
