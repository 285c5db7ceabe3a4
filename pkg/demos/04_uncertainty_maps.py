"""Posterior attainment and coverage maps from conditional sample paths.

After a short PALS run on g7 this script refits the surrogates, draws joint
posterior sample paths over the grid, and prints the coverage probability
map (how often each input is Pareto-optimal under the posterior) next to
the true Pareto set.
"""

import numpy as np

from pals import gp
from pals.drivers import RunConfig, _LoopState
from pals.metrics import attainment_map, coverage_map
from pals.problems import GRID_SIDE, get_problem


def glyph(p):
    if p >= 0.75:
        return "#"
    if p >= 0.25:
        return "+"
    if p > 0.0:
        return "."
    return " "


def main():
    problem = get_problem("g7")
    config = RunConfig(algorithm="PALS", budget=3000, batch_size=200)
    from pals.drivers import run
    record = run(problem, config, seed=1)
    print(f"run finished: {record.termination}, "
          f"{record.total_evaluations} evaluations")

    # rebuild the posterior from an identical replay and draw paths
    state = _LoopState(problem, config, 1)
    for it in record.iterations:
        if it.selected >= 0:
            state.evaluate_batch(it.selected)
    field = state.posterior(with_covariance=True)
    paths = gp.sample_paths(field, 200, seed=5)

    cov = coverage_map(paths)
    truth = set(int(i) for i in problem.pareto_set)
    print("\ncoverage probability ('#' >= 0.75, '+' >= 0.25, '.' > 0); "
          "columns marked T hold true Pareto points")
    for i1 in reversed(range(GRID_SIDE)):
        row = "".join(glyph(cov[i1 * GRID_SIDE + i2])
                      for i2 in range(GRID_SIDE))
        marks = "".join("T" if i1 * GRID_SIDE + i2 in truth else " "
                        for i2 in range(GRID_SIDE))
        print(f"{row}   {marks}")

    queries = np.array([[0.2, 0.2], [0.4, 0.4], [0.8, 0.8]])
    att = attainment_map(paths, queries)
    print("\nattainment probabilities:")
    for q, a in zip(queries, att):
        print(f"  z = ({q[0]:.1f}, {q[1]:.1f}): {a:.3f}")


if __name__ == "__main__":
    main()
