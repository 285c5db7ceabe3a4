"""Sequential optimization drivers: PALS, original PAL, PRS, CoRS, ParEGO-EIm.

Every driver is a deterministic function of (problem, config, seed).  All
randomness flows through generators derived from the seed by splitting, so
runs can be replayed bit-for-bit and scheduled concurrently without shared
state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import gp, metrics, pareto
from .problems import ProblemSpec, sample_noisy

ALGORITHMS = ("PALS", "PAL", "PRS", "CoRS", "ParEGO-EIm")


@dataclass(frozen=True)
class RunConfig:
    """Knobs of one optimization run (seed is passed separately)."""

    algorithm: str = "PALS"
    beta_mode: str = "fixed"        # "fixed" (coverage p) or "increasing"
    beta_p: float = 0.5
    beta_delta: float = 0.05
    epsilon: float = 0.0
    batch_size: int = 200
    budget: int = 10000             # evaluations after the initial design
    intersection_mode: str = "none"  # none | intersect | corrected
    n0: int = 20
    initial_replicates: int = 10
    design_candidates: int = 1000
    refit_every: int = 1
    reml_starts: int = 5
    cors_paths: int = 40
    parego_rho: float = 0.05
    noise_from_replicates: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.batch_size < 1 or self.budget < 0 or self.n0 < 1:
            raise ValueError("invalid batch_size/budget/n0")
        if self.beta_mode == "fixed" and not 0 < self.beta_p < 1:
            raise ValueError("beta_p must lie in (0, 1)")
        if self.beta_mode == "increasing" and not 0 < self.beta_delta < 1:
            raise ValueError("beta_delta must lie in (0, 1)")
        if self.intersection_mode not in ("none", "intersect", "corrected"):
            raise ValueError("invalid intersection_mode")


@dataclass
class IterationRecord:
    iteration: int
    selected: int          # -1 on the terminal record
    beta: float
    n_pareto: int
    n_dominated: int
    n_unclassified: int
    vd: float
    m: float
    evaluations_used: int  # total including the initial design


@dataclass
class RunRecord:
    problem: str
    algorithm: str
    seed: int
    config: RunConfig
    iterations: list[IterationRecord]
    predicted_set: np.ndarray
    predicted_front: np.ndarray
    total_evaluations: int
    termination: str       # all_classified | budget | exhausted
    empty_intersections: int = 0


def beta_fixed(p: float) -> float:
    """Squared normal quantile giving a symmetric coverage-p interval."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return float(stats.norm.ppf(0.5 + 0.5 * p) ** 2)


def beta_increasing(n: int, q: int, grid_size: int, delta: float) -> float:
    """Increasing schedule ``2 log(q |X| pi^2 n^2 / (6 delta))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return 2 * math.log(q * grid_size * math.pi**2 * n**2 / (6 * delta))


def _beta_value(config: RunConfig, n: int, q: int, grid_size: int) -> float:
    if config.beta_mode == "fixed":
        return beta_fixed(config.beta_p)
    return beta_increasing(n, q, grid_size, config.beta_delta)


def initial_design(grid, n0: int, candidates: int, seed) -> np.ndarray:
    """Best-of-``candidates`` random maximin design of size n0.

    Each candidate is a uniform random n0-subset of the grid; the one with
    the largest minimal pairwise distance wins.  Deterministic given seed.
    """
    pts = np.asarray(getattr(grid, "points", grid), dtype=float)
    n = len(pts)
    if n0 > n:
        raise ValueError("n0 exceeds grid size")
    rng = np.random.default_rng(seed)
    if n0 == 1:
        return rng.choice(n, size=1, replace=False)
    best_idx, best_d = None, -np.inf
    for _ in range(candidates):
        idx = rng.choice(n, size=n0, replace=False)
        sub = pts[idx]
        d2 = np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        dmin = d2.min()
        if dmin > best_d:
            best_d, best_idx = dmin, idx
    return np.sort(best_idx)


def plug_in_prediction(field: gp.PosteriorField):
    """Pareto set/front of the posterior means (ignores residual spread)."""
    means = field.mean
    if means.shape[1] == 2:
        idx = pareto.pareto_indices_2d(means)
    else:
        idx = pareto.pareto_indices(means)
    return idx, means[idx].copy()


class _LoopState:
    """Shared plumbing of all drivers: store, refits, records, metrics."""

    def __init__(self, problem: ProblemSpec, config: RunConfig, seed: int):
        self.problem = problem
        self.config = config
        self.seed = seed
        ss = np.random.SeedSequence([int(seed)])
        s_design, s_noise, s_algo, s_reml = ss.spawn(4)
        self.rng_noise = np.random.default_rng(s_noise)
        self.rng_algo = np.random.default_rng(s_algo)
        self.reml_seed = int(s_reml.generate_state(1)[0])
        self.grid = problem.grid.points
        self.q = 2
        self.n = len(self.grid)
        self.store = gp.ObservationStore(self.n, self.q)
        design = initial_design(problem.grid, config.n0,
                                config.design_candidates, s_design)
        for idx in design:
            vals = sample_noisy(problem, int(idx), config.initial_replicates,
                                self.rng_noise)
            self.store.fold(int(idx), vals)
        self.params: list[gp.KernelParams | None] = [None] * self.q
        self.evals_post = 0
        self.iteration = 0
        self.records: list[IterationRecord] = []
        self.truth_set, self.truth_front = problem.pareto_set, problem.pareto_front
        self.empty_intersections = 0

    def refit_due(self) -> bool:
        return (self.params[0] is None
                or self.iteration % self.config.refit_every == 0)

    def fit_objectives(self) -> None:
        for j in range(self.q):
            first = self.params[j] is None
            self.params[j] = gp.fit_reml(
                self.store, self.grid, j, init=self.params[j],
                seed=self.reml_seed + j,
                n_starts=self.config.reml_starts if first else 1,
                noise_from_replicates=self.config.noise_from_replicates)

    def posterior(self, with_covariance: bool = False) -> gp.PosteriorField:
        if self.refit_due():
            self.fit_objectives()
        return gp.posterior(self.store, self.grid, self.params,
                            with_covariance=with_covariance)

    def measure(self, field: gp.PosteriorField):
        pred_idx, pred_front = plug_in_prediction(field)
        vd = metrics.symmetric_difference_volume(self.truth_front, pred_front)
        m = metrics.misclassification_rate(self.truth_set, pred_idx, self.n)
        return pred_idx, pred_front, vd, m

    def evaluate_batch(self, index: int) -> None:
        vals = sample_noisy(self.problem, index, self.config.batch_size,
                            self.rng_noise)
        self.store.fold(index, vals)
        self.evals_post += self.config.batch_size
        self.iteration += 1

    def record(self, selected: int, beta: float, sizes, vd: float, m: float):
        self.records.append(IterationRecord(
            iteration=len(self.records), selected=selected, beta=beta,
            n_pareto=sizes[0], n_dominated=sizes[1], n_unclassified=sizes[2],
            vd=vd, m=m,
            evaluations_used=self.store.total_evaluations))

    def finish(self, pred_idx, pred_front, termination: str) -> RunRecord:
        return RunRecord(
            problem=self.problem.name, algorithm=self.config.algorithm,
            seed=self.seed, config=self.config, iterations=self.records,
            predicted_set=pred_idx, predicted_front=pred_front,
            total_evaluations=self.store.total_evaluations,
            termination=termination,
            empty_intersections=self.empty_intersections)


def _intersect_arrays(state: _LoopState, prev_lo, prev_up, q_lo, q_up, mu,
                      corrected_always: bool):
    """Componentwise intersection with the corrected-rectangle fallback.

    Empty intersections collapse to the smallest rectangle containing the
    posterior mean (degenerate at mu); each such event is counted.
    """
    lo = np.maximum(prev_lo, q_lo)
    up = np.minimum(prev_up, q_up)
    empty = np.any(lo > up, axis=1)
    if empty.any():
        state.empty_intersections += int(empty.sum())
        lo = np.where(empty[:, None], mu, lo)
        up = np.where(empty[:, None], mu, up)
    if corrected_always:
        lo = np.minimum(lo, mu)
        up = np.maximum(up, mu)
    return lo, up


def run_pals(problem: ProblemSpec, config: RunConfig, seed: int) -> RunRecord:
    """Batched stochastic loop with full reclassification each iteration.

    Revisits are allowed, the classification regions default to the plain
    posterior rectangles (``intersection_mode='none'``), and the loop stops
    when everything is classified or the evaluation budget is exhausted.
    """
    state = _LoopState(problem, config, seed)
    prev_lo = np.full((state.n, state.q), -np.inf)
    prev_up = np.full((state.n, state.q), np.inf)
    while True:
        fld = state.posterior()
        pred_idx, pred_front, vd, m = state.measure(fld)
        beta = _beta_value(config, state.iteration + 1, state.q, state.n)
        half = math.sqrt(beta) * fld.sd
        q_lo, q_up = fld.mean - half, fld.mean + half
        if config.intersection_mode == "none":
            lo, up = q_lo, q_up
        else:
            lo, up = _intersect_arrays(
                state, prev_lo, prev_up, q_lo, q_up, fld.mean,
                corrected_always=(config.intersection_mode == "corrected"))
            prev_lo, prev_up = lo, up
        cls = pareto.classify_bounds(lo, up, config.epsilon)
        sizes = cls.sizes()
        if sizes[2] == 0:
            state.record(-1, beta, sizes, vd, m)
            return state.finish(pred_idx, pred_front, "all_classified")
        if state.evals_post >= config.budget:
            state.record(-1, beta, sizes, vd, m)
            return state.finish(pred_idx, pred_front, "budget")
        sel = pareto.select_next_bounds(cls, lo, up)
        state.record(sel, beta, sizes, vd, m)
        state.evaluate_batch(sel)


def run_pal_original(problem: ProblemSpec, config: RunConfig,
                     seed: int) -> RunRecord:
    """No-revisit variant with intersected regions and monotone classes.

    Visited points collapse to degenerate rectangles at their empirical
    means, only still-unclassified points are reclassified, and selection
    excludes visited points.  Empty intersections fall back to the
    corrected (bounding-box) construction and are counted.
    """
    state = _LoopState(problem, config, seed)
    prev_lo = np.full((state.n, state.q), -np.inf)
    prev_up = np.full((state.n, state.q), np.inf)
    labels = np.zeros(state.n, dtype=np.int8)  # 0 = U, 1 = P, 2 = N
    while True:
        fld = state.posterior()
        pred_idx, pred_front, vd, m = state.measure(fld)
        beta = _beta_value(config, state.iteration + 1, state.q, state.n)
        half = math.sqrt(beta) * fld.sd
        lo, up = _intersect_arrays(state, prev_lo, prev_up,
                                   fld.mean - half, fld.mean + half,
                                   fld.mean, corrected_always=False)
        visited = state.store.visited_indices
        lo[visited] = state.store.means[visited]
        up[visited] = state.store.means[visited]
        prev_lo, prev_up = lo.copy(), up.copy()

        # reclassify only the currently unclassified points
        eps = config.epsilon
        opt = lo + eps
        pes = up - eps
        unc = np.flatnonzero(labels == 0)
        if len(unc):
            dom_p = pareto.domination_matrix(opt, pes[unc])
            dom_n = pareto.domination_matrix(pes, opt[unc])
            self_col = np.arange(len(unc))
            dom_p[unc, self_col] = False
            dom_n[unc, self_col] = False
            to_p = ~dom_p.any(axis=0)
            to_n = dom_n.any(axis=0) & ~to_p
            labels[unc[to_p]] = 1
            labels[unc[to_n]] = 2
        cls = pareto.Classification(np.flatnonzero(labels == 1),
                                    np.flatnonzero(labels == 2),
                                    np.flatnonzero(labels == 0))
        sizes = cls.sizes()
        if sizes[2] == 0:
            state.record(-1, beta, sizes, vd, m)
            return state.finish(pred_idx, pred_front, "all_classified")
        if state.evals_post >= config.budget:
            state.record(-1, beta, sizes, vd, m)
            return state.finish(pred_idx, pred_front, "budget")
        try:
            sel = pareto.select_next_bounds(cls, lo, up, exclude_visited=True,
                                            visited=visited)
        except pareto.NoSelectablePointError:
            state.record(-1, beta, sizes, vd, m)
            return state.finish(pred_idx, pred_front, "exhausted")
        state.record(sel, beta, sizes, vd, m)
        state.evaluate_batch(sel)


def _run_sampling_loop(state: _LoopState, choose) -> RunRecord:
    """Budget-only loop shared by PRS / CoRS / ParEGO-EIm.

    ``choose(state, field)`` returns the next index; classification sizes
    are reported from the plug-in prediction (these methods do not maintain
    a three-way partition).
    """
    config = state.config
    while True:
        need_cov = config.algorithm == "CoRS"
        fld = state.posterior(with_covariance=need_cov)
        pred_idx, pred_front, vd, m = state.measure(fld)
        sizes = (len(pred_idx), state.n - len(pred_idx), 0)
        if state.evals_post >= config.budget:
            state.record(-1, float("nan"), sizes, vd, m)
            return state.finish(pred_idx, pred_front, "budget")
        sel = choose(state, fld, pred_idx)
        state.record(sel, float("nan"), sizes, vd, m)
        state.evaluate_batch(sel)


def run_prs(problem: ProblemSpec, config: RunConfig, seed: int) -> RunRecord:
    """Pure random search: uniform index each iteration, batch of k."""
    state = _LoopState(problem, config, seed)

    def choose(st, fld, pred_idx):
        return int(st.rng_algo.integers(st.n))

    return _run_sampling_loop(state, choose)


def run_cors(problem: ProblemSpec, config: RunConfig, seed: int) -> RunRecord:
    """Concentrated random sampling on misclassification probability.

    Per-point weights are the disagreement frequencies between the plug-in
    Pareto membership and the membership under conditional sample paths;
    all-zero weights fall back to uniform.
    """
    state = _LoopState(problem, config, seed)

    def choose(st, fld, pred_idx):
        paths = gp.sample_paths(fld, st.config.cors_paths, st.rng_algo)
        plugin = np.zeros(st.n, dtype=bool)
        plugin[pred_idx] = True
        disagree = np.zeros(st.n)
        for path in paths:
            member = np.zeros(st.n, dtype=bool)
            member[pareto.pareto_indices_2d(path)] = True
            disagree += member != plugin
        total = disagree.sum()
        if total == 0:
            weights = np.full(st.n, 1.0 / st.n)
        else:
            weights = disagree / total
        return int(st.rng_algo.choice(st.n, p=weights))

    return _run_sampling_loop(state, choose)


def expected_improvement(mu: np.ndarray, sd: np.ndarray,
                         best: float) -> np.ndarray:
    """EI of dropping below ``best`` under N(mu, sd^2), elementwise."""
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    ei = np.maximum(best - mu, 0.0)
    pos = sd > 0
    t = (best - mu[pos]) / sd[pos]
    ei[pos] = (best - mu[pos]) * stats.norm.cdf(t) + sd[pos] * stats.norm.pdf(t)
    return ei


def run_parego_eim(problem: ProblemSpec, config: RunConfig,
                   seed: int) -> RunRecord:
    """Random-scalarization loop with expected improvement below the best mean.

    Each iteration draws a simplex weight, scalarizes the empirical means by
    the augmented Chebyshev rule, fits one GP to the scalarized folded data
    and maximizes EI with respect to the minimal scalarized posterior mean
    over the visited points.
    """
    state = _LoopState(problem, config, seed)
    scal_params: list[gp.KernelParams | None] = [None]

    def choose(st, fld, pred_idx):
        u = st.rng_algo.random()
        lam = np.array([u, 1.0 - u])
        vis = st.store.visited_indices
        weighted = st.store.means[vis] * lam
        s = weighted.max(axis=1) + st.config.parego_rho * weighted.sum(axis=1)

        scal = gp.ObservationStore(st.n, 1)
        scal.counts[vis] = st.store.counts[vis]
        scal.means[vis, 0] = s
        scal_params[0] = gp.fit_reml(
            scal, st.grid, 0, init=scal_params[0], seed=st.reml_seed + 7,
            n_starts=st.config.reml_starts if scal_params[0] is None else 1)
        sfld = gp.posterior(scal, st.grid, [scal_params[0]])
        mu, sd = sfld.mean[:, 0], sfld.sd[:, 0]
        best = float(mu[vis].min())
        return int(np.argmax(expected_improvement(mu, sd, best)))

    return _run_sampling_loop(state, choose)


_RUNNERS = {
    "PALS": run_pals,
    "PAL": run_pal_original,
    "PRS": run_prs,
    "CoRS": run_cors,
    "ParEGO-EIm": run_parego_eim,
}


def run(problem: ProblemSpec, config: RunConfig, seed: int) -> RunRecord:
    """Dispatch on ``config.algorithm``."""
    return _RUNNERS[config.algorithm](problem, config, seed)
