"""Variable selection (median correct / incorrect) on the simulation designs.

    python3 scripts/sim_selection.py --examples 1 3 --modes aenet
"""
import argparse

import numpy as np

from sdwd.experiments import StudyConfig, run_study, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--examples", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--modes", nargs="+", default=["lasso", "enet", "aenet"])
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--p", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("example\tmode\tmedian_C\tmedian_IC\tmean_IC\tmean_error_pct")
    for ex in args.examples:
        for mode in args.modes:
            reps = run_study(StudyConfig(example_id=ex, mode=mode, replicates=args.replicates,
                                         p=args.p, seed=args.seed))
            s = summarize(reps)
            mean_ic = np.mean([r.incorrect for r in reps])
            print(f"{ex}\t{mode}\t{s['median_correct']:g}\t{s['median_incorrect']:g}\t"
                  f"{mean_ic:.1f}\t{100 * s['mean_error']:.2f}", flush=True)


if __name__ == "__main__":
    main()
