"""Small head-to-head comparison of all five methods on one problem.

A miniature version of the benchmark: a handful of replications per method
on g6, reporting the mean final symmetric-difference volume and
misclassification rate.  The full harness (``pals run``) does the same at
scale with caching and CSV output.
"""

import numpy as np

from pals.drivers import ALGORITHMS, RunConfig, run
from pals.problems import get_problem


def main():
    problem = get_problem("g6")
    reps = 5
    print(f"{'method':>12} {'V_d':>10} {'M':>8}")
    for algorithm in ALGORITHMS:
        config = RunConfig(algorithm=algorithm, budget=3000, batch_size=200)
        vds, ms = [], []
        for seed in range(reps):
            rec = run(problem, config, seed)
            vds.append(rec.iterations[-1].vd)
            ms.append(rec.iterations[-1].m)
        print(f"{algorithm:>12} {np.mean(vds):>10.5f} {np.mean(ms):>8.4f}")


if __name__ == "__main__":
    main()
