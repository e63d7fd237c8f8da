"""Throughput comparison of the two protocol-loop kernels.

Both kernels draw identical streams and produce identical tallies; the only
difference is the host language of the inner loop.  Usage:

    python3 benchmarks/bench_kernels.py [--runs N] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bellsim import zoo
from bellsim.belltest import as_machine_under_test, default_inputs
from bellsim._kernels import pyloop

try:
    from bellsim._kernels import cyloop
except ImportError:
    cyloop = None


def timed(kernel, kt, n_runs: int, repeat: int) -> tuple[float, np.ndarray, np.ndarray]:
    best = float("inf")
    counts = sums = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        counts, sums = kernel.run_chunk(
            42,
            0,
            n_runs,
            kt.has_state_draw,
            kt.init_cum,
            kt.lambda_cum,
            kt.a_cum,
            kt.b_cum,
            kt.step_cum,
            kt.branch_prod,
        )
        best = min(best, time.perf_counter() - t0)
    return best, counts, sums


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    for name in ("M5", "M3_pair", "Q_pair_entangled"):
        mut = as_machine_under_test(zoo.builtin(name).machine)
        kt = mut.kernel_tables(default_inputs(mut))
        t_py, c_py, s_py = timed(pyloop, kt, args.runs, args.repeat)
        line = f"{name:18s} python {args.runs / t_py:12.0f} runs/s"
        if cyloop is not None:
            t_cy, c_cy, s_cy = timed(cyloop, kt, args.runs, args.repeat)
            assert np.array_equal(c_py, c_cy) and np.array_equal(s_py, s_cy)
            line += f"   cython {args.runs / t_cy:12.0f} runs/s   speedup {t_py / t_cy:6.1f}x"
        else:
            line += "   (compiled kernel not built)"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
