"""Active learning and baselines for noisy bi-objective grid optimization."""

from .pareto import (
    Classification,
    NoSelectablePointError,
    UncertaintyRegion,
    classify,
    classify_bounds,
    corrected_intersect,
    dominates,
    domination_matrix,
    intersect_regions,
    pareto_indices,
    pareto_indices_2d,
    rectangle_from_posterior,
    select_next,
    select_next_bounds,
)
from .gp import (
    KernelParams,
    ObservationStore,
    PosteriorField,
    fit_reml,
    matern52,
    matern52_gram,
    posterior,
    sample_paths,
)
from .problems import (
    GRID_SIDE,
    GRID_SIZE,
    PROBLEM_NAMES,
    InputGrid,
    ProblemSpec,
    eval_raw,
    get_problem,
    ground_truth,
    make_grid,
    sample_noisy,
    scale_to_unit,
)
from .metrics import (
    DEFAULT_REFERENCE,
    attainment_map,
    coverage_map,
    dominated_volume_2d,
    misclassification_rate,
    symmetric_difference_volume,
)
from .drivers import (
    ALGORITHMS,
    IterationRecord,
    RunConfig,
    RunRecord,
    beta_fixed,
    beta_increasing,
    initial_design,
    plug_in_prediction,
    run,
    run_cors,
    run_pal_original,
    run_pals,
    run_parego_eim,
    run_prs,
)
from .bench import (
    ExperimentConfig,
    derive_seed,
    load_config,
    run_experiment,
    summary_table,
    validate,
)

__version__ = "0.1.0"
