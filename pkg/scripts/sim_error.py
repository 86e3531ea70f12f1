"""Test error of L1 / elastic-net / adaptive DWD on the simulation designs.

    python3 scripts/sim_error.py --examples 1 3 --modes lasso enet --replicates 20
"""
import argparse
import logging

from sdwd.experiments import StudyConfig, run_study, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--examples", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--modes", nargs="+", default=["lasso", "enet", "aenet"])
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--p", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    print("example\tmode\tmean_error_pct\tse_pct\tbayes_pct")
    for ex in args.examples:
        for mode in args.modes:
            cfg = StudyConfig(example_id=ex, mode=mode, replicates=args.replicates, p=args.p,
                              seed=args.seed)
            s = summarize(run_study(cfg), ex)
            print(f"{ex}\t{mode}\t{100 * s['mean_error']:.2f}\t{100 * s['se_error']:.2f}\t"
                  f"{100 * s['bayes_error']:.2f}", flush=True)


if __name__ == "__main__":
    main()
