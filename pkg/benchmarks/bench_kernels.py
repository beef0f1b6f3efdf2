"""Compare the numba and numpy shot-tally kernels.

Usage: python3 benchmarks/bench_kernels.py [--shots N] [--outcomes K ...] [--repeat R]
"""
import argparse
import time

import numpy as np

from twirlsim import _kernels
from twirlsim.statevector import ShotPlan, sample_counts


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shots", type=int, default=4_000_000)
    ap.add_argument("--outcomes", type=int, nargs="+", default=[2, 8, 32])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--streams", type=int, default=4)
    args = ap.parse_args(argv)

    if _kernels.tally_numba is None:
        print("numba unavailable or disabled; only the numpy kernel can be timed")
    rng = np.random.default_rng(0)
    u = rng.random(args.shots)
    print(f"{'kernel':<22}{'outcomes':>9}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for k in args.outcomes:
        cdf = np.cumsum(rng.dirichlet(np.ones(k)))
        cdf[-1] = 1.0
        t_np = best_of(lambda: _kernels.tally_numpy(u, cdf), args.repeat)
        row = f"{'tally (raw uniforms)':<22}{k:>9}{t_np:>10.4f}"
        if _kernels.tally_numba is not None:
            _kernels.tally_numba(u[:10], cdf)
            assert np.array_equal(_kernels.tally_numba(u, cdf), _kernels.tally_numpy(u, cdf))
            t_nb = best_of(lambda: _kernels.tally_numba(u, cdf), args.repeat)
            row += f"{t_nb:>10.4f}{t_np / t_nb:>8.2f}x"
        print(row)

        probs = np.diff(np.concatenate(([0.0], cdf)))
        plan = ShotPlan(args.shots, 1, args.streams)
        t_np = best_of(lambda: sample_counts(probs, plan, _kernels.tally_numpy), args.repeat)
        row = f"{'sample_counts':<22}{k:>9}{t_np:>10.4f}"
        if _kernels.tally_numba is not None:
            t_nb = best_of(lambda: sample_counts(probs, plan, _kernels.tally_numba), args.repeat)
            row += f"{t_nb:>10.4f}{t_np / t_nb:>8.2f}x"
        print(row)


if __name__ == "__main__":
    main()
