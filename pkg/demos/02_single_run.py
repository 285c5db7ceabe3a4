"""One PALS run, narrated iteration by iteration.

Runs the active-learning loop on problem g5 with the default fixed beta
and prints how the three-way classification and both error metrics evolve
as the evaluation budget is spent.
"""

from pals.drivers import RunConfig, run
from pals.problems import get_problem


def main():
    problem = get_problem("g5")
    config = RunConfig(algorithm="PALS", beta_mode="fixed", beta_p=0.5,
                       budget=4000, batch_size=200)
    record = run(problem, config, seed=0)

    print(f"problem {record.problem}, algorithm {record.algorithm}, "
          f"termination: {record.termination}")
    print(f"{'iter':>4} {'sel':>5} {'|P|':>5} {'|N|':>5} {'|U|':>5} "
          f"{'V_d':>10} {'M':>8} {'evals':>7}")
    for it in record.iterations:
        print(f"{it.iteration:>4} {it.selected:>5} {it.n_pareto:>5} "
              f"{it.n_dominated:>5} {it.n_unclassified:>5} "
              f"{it.vd:>10.5f} {it.m:>8.4f} {it.evaluations_used:>7}")

    truth = set(int(i) for i in problem.pareto_set)
    predicted = set(int(i) for i in record.predicted_set)
    print(f"\ntrue Pareto set: {len(truth)} points; "
          f"predicted: {len(predicted)}; "
          f"agreement: {len(truth & predicted)}")


if __name__ == "__main__":
    main()
