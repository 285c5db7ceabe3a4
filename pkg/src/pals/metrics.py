"""Error metrics for Pareto front and set estimates (bi-objective, exact).

The dominated region of a front F w.r.t. a reference point R is the union
of the boxes between each front point and R.  For q = 2 its area is
computed exactly by a sort-and-staircase sweep; Monte-Carlo integration is
kept in the test suite as an independent oracle only.
"""

from __future__ import annotations

import numpy as np

from .pareto import pareto_indices_2d

DEFAULT_REFERENCE = (1.1, 1.1)


def _canonical_front(front, ref) -> np.ndarray:
    """Pareto-filter and sort by the first objective (staircase order).

    Points that do not dominate the reference enclose zero area within the
    reference box and are dropped.
    """
    pts = np.atleast_2d(np.asarray(front, dtype=float))
    if pts.size == 0:
        return pts.reshape(0, 2)
    if pts.shape[1] != 2:
        raise ValueError("metrics are defined for exactly 2 objectives")
    ref = np.asarray(ref, dtype=float)
    dominates_ref = np.all(pts <= ref, axis=1) & np.any(pts < ref, axis=1)
    pts = pts[dominates_ref]
    if len(pts) == 0:
        return pts.reshape(0, 2)
    pts = pts[pareto_indices_2d(pts)]
    return pts[np.argsort(pts[:, 0])]


def dominated_volume_2d(front, ref=DEFAULT_REFERENCE) -> float:
    """Exact area dominated by a front and dominating the reference point."""
    ref = np.asarray(ref, dtype=float)
    pts = _canonical_front(front, ref)
    if len(pts) == 0:
        return 0.0
    area = 0.0
    for i, (x, y) in enumerate(pts):
        x_next = pts[i + 1, 0] if i + 1 < len(pts) else ref[0]
        area += (x_next - x) * (ref[1] - y)
    return float(area)


def symmetric_difference_volume(true_front, predicted_front,
                                ref=DEFAULT_REFERENCE) -> float:
    """Area of the symmetric difference of the two dominated regions.

    The union of the two regions is the dominated region of the Pareto
    subset of the pooled front points, hence
    ``2 V(union) - V(A) - V(B)``.
    """
    a = np.atleast_2d(np.asarray(true_front, dtype=float))
    b = np.atleast_2d(np.asarray(predicted_front, dtype=float))
    va = dominated_volume_2d(a, ref)
    vb = dominated_volume_2d(b, ref)
    pooled = np.vstack([a, b])
    v_union = dominated_volume_2d(pooled, ref)
    return float(max(2 * v_union - va - vb, 0.0))


def misclassification_rate(true_set, predicted_set, grid_size: int) -> float:
    """Fraction of grid points on which the two index sets disagree."""
    t = np.asarray(true_set, dtype=int)
    p = np.asarray(predicted_set, dtype=int)
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    for s in (t, p):
        if len(s) and (s.min() < 0 or s.max() >= grid_size):
            raise ValueError("index out of range")
    diff = np.setxor1d(t, p)
    return len(diff) / grid_size


def attainment_map(paths: np.ndarray, queries) -> np.ndarray:
    """Per-query probability of being dominated by a sample path's front.

    ``paths`` has shape (n_paths, grid_size, 2); ``queries`` is (n_q, 2)
    points in objective space.  For each query the returned value is the
    fraction of paths whose grid-image front dominates it.
    """
    paths = np.asarray(paths, dtype=float)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if paths.ndim != 3 or paths.shape[0] < 1:
        raise ValueError("paths must be (n_paths, grid_size, q) with n_paths >= 1")
    counts = np.zeros(len(queries))
    for path in paths:
        front = path[pareto_indices_2d(path)]
        le = (front[:, None, :] <= queries[None, :, :]).all(axis=-1)
        lt = (front[:, None, :] < queries[None, :, :]).any(axis=-1)
        counts += (le & lt).any(axis=0)
    return counts / len(paths)


def coverage_map(paths: np.ndarray) -> np.ndarray:
    """Per-grid-point probability of being Pareto-optimal under the paths."""
    paths = np.asarray(paths, dtype=float)
    if paths.ndim != 3 or paths.shape[0] < 1:
        raise ValueError("paths must be (n_paths, grid_size, q) with n_paths >= 1")
    n_paths, n, _ = paths.shape
    counts = np.zeros(n)
    for path in paths:
        counts[pareto_indices_2d(path)] += 1
    return counts / n_paths
