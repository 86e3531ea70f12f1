"""Timing of full K=100 paths on a microarray-sized synthetic design (n=102, p=6033).

    python3 scripts/path_benchmark.py --lambda2 0 1 --repeats 3
"""
import argparse
import time

import numpy as np

from sdwd.data import Dataset, standardize
from sdwd.path import PathConfig, fit_path
from sdwd.solver import SolverConfig


def synthetic(n, p, seed):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    x = rng.standard_normal((n, p))
    x[:, :20] += 0.8 * y[:, None]
    return standardize(Dataset(x, y))[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=102)
    ap.add_argument("--p", type=int, default=6033)
    ap.add_argument("--lambda2", type=float, nargs="+", default=[0.0, 1e-4, 1e-2, 1.0])
    ap.add_argument("--curvature", choices=("adaptive", "global"), default="adaptive")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    d = synthetic(args.n, args.p, args.seed)
    solver = SolverConfig(curvature=args.curvature)
    fit_path(d, PathConfig(nlambda=3, solver=solver))          # compile
    print("lambda2\tbest_seconds\tmax_kkt\ttotal_cycles\tfinal_nnz")
    for l2 in args.lambda2:
        cfg = PathConfig(lambda2=l2, solver=solver)
        times = []
        for _ in range(args.repeats):
            t = time.perf_counter()
            sp = fit_path(d, cfg)
            times.append(time.perf_counter() - t)
        print(f"{l2:g}\t{min(times):.3f}\t{sp.kkt_max_violation.max():.1e}\t"
              f"{sp.cycles_used.sum()}\t{sp.nonzero_counts[-1]}", flush=True)


if __name__ == "__main__":
    main()
