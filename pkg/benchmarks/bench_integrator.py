"""Compare the numba-jitted integration kernel against the plain-Python twin.

Usage: python benchmarks/bench_integrator.py [--steps N]

Runs the resonant-mirror spontaneous-emission setup (the hottest workload
in the package) on both backends, checks the results agree bit-for-bit,
and prints steps/second and the speedup.
"""

import argparse
import math
import time

import numpy as np

from mirrorqed._kernels import HAS_NUMBA, _rk4_delay_loop, _rk4_delay_loop_jit


def run(kernel, n_steps, m, h, args):
    t0 = time.perf_counter()
    out = kernel(n_steps, m, h, *args)
    return out, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=500_000)
    opts = parser.parse_args()

    # resonant mirror in transmon units: cc=0.1, z0=1000, T=2*pi, m=256
    cc, cj, lj, z0 = 0.1, 1.0, 1.0, 1000.0
    t_delay = 2 * math.pi
    m = 256
    h = t_delay / m
    c_sigma = cc * cj / (cc + cj)
    args = (cj, lj, 2.0 / (z0 * c_sigma), 2.0 / (z0 * cj), z0, 1.0)

    print(f"workload: {opts.steps} RK4 steps, delay buffer {m} steps")
    ref, t_py = run(_rk4_delay_loop, opts.steps, m, h, args)
    print(f"numpy/python backend: {t_py:8.3f} s  ({opts.steps / t_py:,.0f} steps/s)")

    if not HAS_NUMBA:
        print("numba not available; nothing to compare")
        return

    run(_rk4_delay_loop_jit, 1000, m, h, args)   # compile outside the timing
    jit, t_jit = run(_rk4_delay_loop_jit, opts.steps, m, h, args)
    print(f"numba backend:        {t_jit:8.3f} s  ({opts.steps / t_jit:,.0f} steps/s)")
    print(f"speedup: {t_py / t_jit:.1f}x")

    for a, b in zip(ref, jit):
        np.testing.assert_array_equal(a, b)
    print("backends agree bit-for-bit")


if __name__ == "__main__":
    main()
