"""Gaussian-process regression on a finite grid with replicated noisy data.

Each objective gets an independent GP with a constant mean integrated out
under an improper uniform prior (ordinary kriging), a Matern 5/2 anisotropic
covariance, and homoscedastic Gaussian observation noise.  Replicated
evaluations at a point are folded into their count and empirical mean, so
the cost of a posterior scales with the number of *distinct* visited points
rather than with the total number of simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, optimize

_SQRT5 = math.sqrt(5.0)

JITTER_START_FACTOR = 1e-10
JITTER_MAX_FACTOR = 1e-4


@dataclass(frozen=True)
class KernelParams:
    """Matern 5/2 hyperparameters plus the observation noise variance."""

    variance: float
    lengthscales: np.ndarray
    noise_variance: float
    degenerate: bool = False
    converged: bool = True

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if not (self.variance > 0 and np.isfinite(self.variance)):
            raise ValueError("variance must be positive and finite")
        if not (self.noise_variance > 0 and np.isfinite(self.noise_variance)):
            raise ValueError("noise_variance must be positive and finite")
        if np.any(ls <= 0) or not np.all(np.isfinite(ls)):
            raise ValueError("lengthscales must be positive and finite")


def matern52(x, x2, params: KernelParams) -> float:
    """Matern 5/2 covariance between two points.

    Distance is Euclidean after dividing each coordinate by its
    lengthscale: ``variance * (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x2))):
        raise ValueError("inputs must be finite")
    r = math.sqrt(float(np.sum(((x - x2) / params.lengthscales) ** 2)))
    return params.variance * (1 + _SQRT5 * r + 5 * r * r / 3) * math.exp(-_SQRT5 * r)


def _matern52_from_r2(r2: np.ndarray) -> np.ndarray:
    """Unit-variance Matern 5/2 correlation from squared scaled distances."""
    r = np.sqrt(np.maximum(r2, 0.0))
    return (1 + _SQRT5 * r + 5 * r2 / 3) * np.exp(-_SQRT5 * r)


def matern52_gram(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Covariance matrix between two point sets (na, d) and (nb, d)."""
    ls = params.lengthscales
    diff = a[:, None, :] / ls - b[None, :, :] / ls
    r2 = np.sum(diff * diff, axis=-1)
    return params.variance * _matern52_from_r2(r2)


class ObservationStore:
    """Replicate-folded noisy evaluations over a fixed grid.

    Per grid index it keeps the replicate count and, per objective, the
    empirical mean and the sum of squared deviations (Welford statistics),
    so folding is exact regardless of batch splits.  The ordered visit log
    records every ``(index, batch_size)`` event.
    """

    def __init__(self, grid_size: int, n_objectives: int):
        if grid_size < 1 or n_objectives < 1:
            raise ValueError("grid_size and n_objectives must be >= 1")
        self.grid_size = grid_size
        self.n_objectives = n_objectives
        self.counts = np.zeros(grid_size, dtype=np.int64)
        self.means = np.zeros((grid_size, n_objectives))
        self.m2 = np.zeros((grid_size, n_objectives))
        self.visit_log: list[tuple[int, int]] = []

    def copy(self) -> "ObservationStore":
        out = ObservationStore(self.grid_size, self.n_objectives)
        out.counts = self.counts.copy()
        out.means = self.means.copy()
        out.m2 = self.m2.copy()
        out.visit_log = list(self.visit_log)
        return out

    @property
    def visited_indices(self) -> np.ndarray:
        return np.flatnonzero(self.counts > 0)

    @property
    def total_evaluations(self) -> int:
        return int(self.counts.sum())

    def fold(self, index: int, values) -> None:
        """Merge a (k, q) batch of responses at ``index`` (Chan's update)."""
        if not 0 <= index < self.grid_size:
            raise IndexError(f"invalid grid index {index}")
        values = np.atleast_2d(np.asarray(values, dtype=float))
        k, q = values.shape
        if k < 1 or q != self.n_objectives:
            raise ValueError("batch must be k x n_objectives with k >= 1")
        bmean = values.mean(axis=0)
        bm2 = np.sum((values - bmean) ** 2, axis=0)
        na = int(self.counts[index])
        delta = bmean - self.means[index]
        tot = na + k
        self.means[index] += delta * (k / tot)
        self.m2[index] += bm2 + delta * delta * (na * k / tot)
        self.counts[index] = tot
        self.visit_log.append((index, k))

    def pooled_noise_variance(self, objective: int) -> float:
        """Replicate-pooled noise estimate: sum of m2 over sum of (n_i - 1)."""
        dof = np.sum(np.maximum(self.counts - 1, 0))
        if dof < 1:
            raise ValueError("insufficient replicates for pooled estimate")
        return float(self.m2[:, objective].sum() / dof)


@dataclass
class PosteriorField:
    """Per-objective posterior mean and sd over the whole grid."""

    mean: np.ndarray            # (grid_size, q)
    sd: np.ndarray              # (grid_size, q)
    params: list[KernelParams]
    trend: np.ndarray           # fitted constant-mean estimate per objective
    grid_points: np.ndarray
    visited: np.ndarray
    _cov_factors: list = field(default_factory=list, repr=False)

    @property
    def n_objectives(self) -> int:
        return self.mean.shape[1]

    def covariance(self, objective: int) -> np.ndarray:
        """Full posterior covariance over the grid for one objective."""
        if not self._cov_factors:
            raise ValueError("field was built without cross-covariances")
        return self._cov_factors[objective]


def _chol_with_jitter(k_mat: np.ndarray, variance: float):
    jitter = JITTER_START_FACTOR * variance
    k0 = k_mat
    while True:
        try:
            return linalg.cholesky(k_mat, lower=True), k_mat
        except linalg.LinAlgError:
            if jitter > JITTER_MAX_FACTOR * variance:
                raise linalg.LinAlgError("ill-conditioned covariance")
            k_mat = k0 + jitter * np.eye(len(k0))
            jitter *= 10


def _neg2_reml(log_theta: np.ndarray, r2_units: np.ndarray, z: np.ndarray,
               inv_counts: np.ndarray) -> float:
    """Restricted likelihood with constant mean and variance profiled out.

    ``log_theta`` holds log lengthscales and the log noise-to-signal ratio;
    ``r2_units`` are the per-dimension squared coordinate differences of the
    visited points, shape (d, m, m).
    """
    d = r2_units.shape[0]
    ls = np.exp(log_theta[:d])
    eta = math.exp(log_theta[d])
    m = len(z)
    r2 = np.tensordot(1.0 / ls**2, r2_units, axes=1)
    a = _matern52_from_r2(r2)
    a[np.diag_indices_from(a)] += eta * inv_counts + 1e-10
    try:
        cf = linalg.cho_factor(a, lower=True)
    except linalg.LinAlgError:
        return 1e12
    ones = np.ones(m)
    ai_one = linalg.cho_solve(cf, ones)
    denom = ones @ ai_one
    beta_hat = (z @ ai_one) / denom
    r = z - beta_hat
    quad = r @ linalg.cho_solve(cf, r)
    if quad <= 0:
        return 1e12
    v_hat = quad / (m - 1)
    logdet = 2 * np.sum(np.log(np.diag(cf[0])))
    val = (m - 1) * math.log(v_hat) + logdet + math.log(denom)
    return val if np.isfinite(val) else 1e12


def fit_reml(store: ObservationStore, grid: np.ndarray, objective: int,
             init: KernelParams | None = None, seed: int = 0,
             n_starts: int = 5, noise_from_replicates: bool = False,
             max_iter: int = 200) -> KernelParams:
    """ReML hyperparameter estimation for one objective.

    Optimizes log lengthscales and the log noise ratio with L-BFGS-B from a
    deterministic multistart; the process variance and the constant mean are
    profiled out analytically.  With ``noise_from_replicates`` the noise
    variance is pinned to the pooled replicate estimate instead of being
    estimated jointly.
    """
    grid = np.asarray(grid, dtype=float)
    vis = store.visited_indices
    m = len(vis)
    if m < 2:
        raise ValueError("insufficient data: need at least 2 distinct points")
    pts = grid[vis]
    d = pts.shape[1]
    z = store.means[vis, objective]
    inv_counts = 1.0 / store.counts[vis]

    diffs = pts[:, None, :] - pts[None, :, :]
    r2_units = np.moveaxis(diffs * diffs, -1, 0)  # (d, m, m)

    span = np.ptp(grid, axis=0)
    span = np.where(span > 0, span, 1.0)
    z_var = float(np.var(z))
    degenerate = not z_var > 0
    if degenerate:
        # constant observations: likelihood pushes noise to its floor
        ls = 0.5 * span
        v = max(float(store.m2[vis, objective].sum()), 1e-12)
        return KernelParams(v, ls, max(v * 1e-6, 1e-18), degenerate=True)

    lo = np.log(np.concatenate([1e-3 * span, [1e-8]]))
    hi = np.log(np.concatenate([1e3 * span, [1e6]]))
    bounds = list(zip(lo, hi))

    starts = []
    if init is not None:
        eta0 = init.noise_variance / init.variance
        starts.append(np.log(np.concatenate([init.lengthscales, [eta0]])))
    starts.append(np.log(np.concatenate([0.5 * span, [1.0]])))
    rng = np.random.default_rng(seed)
    while len(starts) < n_starts:
        starts.append(lo + (hi - lo) * rng.random(d + 1))
    starts = starts[:max(n_starts, 1)]

    best = None
    converged = True
    for x0 in starts:
        x0 = np.clip(x0, lo, hi)
        res = optimize.minimize(
            _neg2_reml, x0, args=(r2_units, z, inv_counts),
            method="L-BFGS-B", bounds=bounds,
            options={"maxiter": max_iter})
        if best is None or res.fun < best.fun:
            best = res
    if best.fun >= 1e12:
        converged = False

    ls = np.exp(best.x[:d])
    eta = math.exp(best.x[d])
    # recover the profiled variance at the optimum
    r2 = np.tensordot(1.0 / ls**2, r2_units, axes=1)
    a = _matern52_from_r2(r2)
    a[np.diag_indices_from(a)] += eta * inv_counts + 1e-10
    cf = linalg.cho_factor(a, lower=True)
    ones = np.ones(m)
    ai_one = linalg.cho_solve(cf, ones)
    beta_hat = (z @ ai_one) / (ones @ ai_one)
    r = z - beta_hat
    v_hat = float(r @ linalg.cho_solve(cf, r)) / (m - 1)
    v_hat = max(v_hat, 1e-18)
    noise = eta * v_hat

    if noise_from_replicates:
        try:
            noise = max(store.pooled_noise_variance(objective), 1e-18)
        except ValueError:
            pass
    return KernelParams(v_hat, ls, max(noise, 1e-18), converged=converged)


def posterior(store: ObservationStore, grid: np.ndarray,
              params: list[KernelParams],
              with_covariance: bool = False) -> PosteriorField:
    """Exact GP posterior over the full grid from folded statistics.

    Uses only the distinct visited points, with per-point noise
    ``noise_variance / count``.  The constant mean is integrated out, so the
    predictive variance includes the mean-estimation term and stays strictly
    positive at visited points whenever the noise variance is positive.
    """
    grid = np.asarray(grid, dtype=float)
    vis = store.visited_indices
    if len(vis) < 1:
        raise ValueError("need at least one visited point")
    pts = grid[vis]
    n = len(grid)
    q = store.n_objectives
    if len(params) != q:
        raise ValueError("one KernelParams per objective required")

    mean = np.empty((n, q))
    var = np.empty((n, q))
    trend = np.empty(q)
    covs = []
    for j, p in enumerate(params):
        z = store.means[vis, j]
        k_train = matern52_gram(pts, pts, p)
        k_train[np.diag_indices_from(k_train)] += p.noise_variance / store.counts[vis]
        chol, k_train = _chol_with_jitter(k_train, p.variance)
        cf = (chol, True)
        ones = np.ones(len(vis))
        ai_one = linalg.cho_solve(cf, ones)
        denom = ones @ ai_one
        beta_hat = (z @ ai_one) / denom
        trend[j] = beta_hat
        alpha = linalg.cho_solve(cf, z - beta_hat)

        k_cross = matern52_gram(grid, pts, p)       # (n, m)
        mean[:, j] = beta_hat + k_cross @ alpha
        v = linalg.solve_triangular(chol, k_cross.T, lower=True)  # (m, n)
        h = (1.0 - k_cross @ ai_one)                 # mean-uncertainty term
        var[:, j] = p.variance - np.sum(v * v, axis=0) + h * h / denom
        if with_covariance:
            k_full = matern52_gram(grid, grid, p)
            cov = k_full - v.T @ v + np.outer(h, h) / denom
            covs.append(cov)
    var = np.maximum(var, 0.0)
    return PosteriorField(mean, np.sqrt(var), list(params), trend,
                          grid, vis, covs)


def sample_paths(field: PosteriorField, count: int, seed) -> np.ndarray:
    """Joint posterior draws over the grid, shape (count, grid_size, q).

    Objectives are sampled independently; a fixed seed gives bit-identical
    paths.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    n, q = field.mean.shape
    out = np.empty((count, n, q))
    for j in range(q):
        cov = field.covariance(j)
        chol, _ = _chol_with_jitter(cov, max(field.params[j].variance, 1e-12))
        white = rng.standard_normal((count, n))
        out[:, :, j] = field.mean[:, j] + white @ chol.T
    return out
