"""Tour of the nine benchmark problems.

Each problem is a pair of scaled test functions on the 21 x 21 grid with
heterogeneous Gaussian noise.  This script prints, per problem, the size of
the true Pareto set, the scaled noise levels, and a coarse picture of where
the Pareto-optimal inputs sit in the unit square.
"""

import numpy as np

from pals.problems import GRID_SIDE, PROBLEM_NAMES, get_problem


def ascii_map(pareto_set):
    mask = np.zeros((GRID_SIDE, GRID_SIDE), dtype=bool)
    for idx in pareto_set:
        mask[idx // GRID_SIDE, idx % GRID_SIDE] = True
    # x1 grows downward in index order; flip so it grows upward on screen
    lines = []
    for row in mask[::-1]:
        lines.append("".join("#" if v else "." for v in row))
    return "\n".join(lines)


def main():
    for name in PROBLEM_NAMES:
        problem = get_problem(name)
        sd = problem.scaled_noise_sd
        print(f"\n=== {name}: {problem.objective_ids[0]} vs "
              f"{problem.objective_ids[1]} ===")
        print(f"Pareto set size: {len(problem.pareto_set)} / 441")
        print(f"scaled noise sd: ({sd[0]:.4f}, {sd[1]:.4f})")
        print(ascii_map(problem.pareto_set))


if __name__ == "__main__":
    main()
