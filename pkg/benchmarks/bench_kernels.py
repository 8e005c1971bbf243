"""Benchmark: compiled integrator kernel vs its pure-Python twin.

Runs the same radial shots through both backends, reports wall times and
the worst relative disagreement of the final states. Run as

    python benchmarks/bench_kernels.py
"""

import math
import time

from blowuplab._kernels import reference

try:
    from blowuplab._kernels import _radial_cy
except ImportError:
    _radial_cy = None

# (label, params, r0, u0, Q0, r_end)
CASES = [
    ("ball N=2 p=2 cubic, blow-up hunt",
     (2.0, 2.0, 1.0, reference.W_CONST, 0.0, 1.0, 0.0, 0.0, 1.0, 3.0),
     1e-12, 3.0, 1e-36, 50.0),
    ("interval p=3 q=4 alpha=0.5, to the edge",
     (1.0, 3.0, 1.0, reference.W_DISTANCE, 0.5, 1.0, 0.0, 0.0, 1.0, 4.0),
     0.0, 0.0, 4.0, 1.0 - 1e-13),
    ("interval p=2 b=d(1+d) cubic, to the edge",
     (1.0, 2.0, 1.0, reference.W_CONST, 0.0, 1.0, 1.0, 1.0, 1.0, 3.0),
     0.0, 0.0, 9.0, 1.0 - 1e-13),
]

REPEATS = 5


def run(backend, params, r0, u0, Q0, r_end):
    return backend.integrate(params, r0, u0, Q0, r_end, rtol=1e-11)


def time_backend(backend, case):
    _, params, r0, u0, Q0, r_end = case
    best = math.inf
    res = None
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        res = run(backend, params, r0, u0, Q0, r_end)
        best = min(best, time.perf_counter() - t0)
    return best, res


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def main():
    print(f"{'case':45s} {'python':>10s} {'cython':>10s} {'speedup':>8s} {'agree':>9s}")
    for case in CASES:
        t_py, r_py = time_backend(reference, case)
        if _radial_cy is None:
            print(f"{case[0]:45s} {t_py*1e3:9.2f}ms {'n/a':>10s}")
            continue
        t_cy, r_cy = time_backend(_radial_cy, case)
        agree = max(rel(r_py["u"], r_cy["u"]), rel(r_py["Q"], r_cy["Q"]),
                    rel(r_py["r"], r_cy["r"]))
        assert r_py["status"] == r_cy["status"]
        print(f"{case[0]:45s} {t_py*1e3:9.2f}ms {t_cy*1e3:9.2f}ms "
              f"{t_py/t_cy:7.1f}x {agree:9.1e}")
    if _radial_cy is None:
        print("\ncompiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
