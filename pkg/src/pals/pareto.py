"""Pareto domination, uncertainty rectangles and the three-way classification.

All objectives are minimized.  A vector ``z`` dominates ``z2`` when
``z[j] <= z2[j]`` for every objective with at least one strict inequality.

Rectangles are axis-aligned boxes in objective space described by their
lower ("optimistic") and upper ("pessimistic") corners.  Degenerate
rectangles with ``lower == upper`` are legal everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NoSelectablePointError(RuntimeError):
    """Raised when the candidate set of ``select_next`` is empty."""


@dataclass(frozen=True)
class UncertaintyRegion:
    """Axis-aligned hyper-rectangle in objective space.

    ``lower`` holds the optimistic corner, ``upper`` the pessimistic one.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape:
            raise ValueError("corner shape mismatch")
        if np.any(lower > upper):
            raise ValueError("lower corner must not exceed upper corner")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True)
class Classification:
    """Partition of grid indices into Pareto / dominated / unclassified."""

    pareto: np.ndarray
    dominated: np.ndarray
    unclassified: np.ndarray

    def sizes(self) -> tuple[int, int, int]:
        return len(self.pareto), len(self.dominated), len(self.unclassified)


def dominates(z, z2) -> bool:
    """True iff ``z`` Pareto-dominates ``z2`` (componentwise <=, one strict)."""
    z = np.asarray(z, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z.shape != z2.shape:
        raise ValueError("length mismatch between objective vectors")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(z2))):
        raise ValueError("objective vectors must be finite")
    return bool(np.all(z <= z2) and np.any(z < z2))


def domination_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise domination: ``out[i, j]`` iff ``a[i]`` dominates ``b[j]``.

    ``a`` and ``b`` are (n, q) and (m, q) arrays; the result is (n, m).
    """
    le = np.all(a[:, None, :] <= b[None, :, :], axis=-1)
    lt = np.any(a[:, None, :] < b[None, :, :], axis=-1)
    return le & lt


def pareto_indices(points) -> np.ndarray:
    """Indices of the non-dominated points of a finite set.

    Duplicated identical vectors are all retained (ties are mutually
    non-dominating).  Raises on an empty input.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("empty point set")
    dom = domination_matrix(pts, pts)
    return np.flatnonzero(~dom.any(axis=0))


def pareto_indices_2d(points: np.ndarray) -> np.ndarray:
    """Sweep-based non-dominated indices for the bi-objective case.

    Equivalent to :func:`pareto_indices` for q = 2 but O(n log n); used in
    the hot loops of the drivers and the sample-path metrics.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("empty point set")
    if pts.shape[1] != 2:
        raise ValueError("pareto_indices_2d requires exactly 2 objectives")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    a = pts[order, 0]
    b = pts[order, 1]
    n = len(a)
    keep = np.zeros(n, dtype=bool)
    best = np.inf
    i = 0
    while i < n:
        j = i
        while j < n and a[j] == a[i]:
            j += 1
        gmin = b[i]  # sorted ascending within the equal-a group
        if gmin < best:
            k = i
            while k < j and b[k] == gmin:
                keep[k] = True
                k += 1
            best = gmin
        i = j
    return np.sort(order[keep])


def rectangle_from_posterior(mu, sigma, beta: float) -> UncertaintyRegion:
    """Rectangle ``mu +- sqrt(beta) * sigma`` componentwise."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if np.any(sigma < 0):
        raise ValueError("sigma entries must be nonnegative")
    half = np.sqrt(beta) * sigma
    return UncertaintyRegion(mu - half, mu + half)


def intersect_regions(prev: UncertaintyRegion, q: UncertaintyRegion):
    """Componentwise intersection; returns None when the result is empty.

    An empty intersection is a value, not an error: callers log the event
    and decide how to recover.
    """
    lower = np.maximum(prev.lower, q.lower)
    upper = np.minimum(prev.upper, q.upper)
    if np.any(lower > upper):
        return None
    return UncertaintyRegion(lower, upper)


def corrected_intersect(prev: UncertaintyRegion, q: UncertaintyRegion,
                        mu) -> UncertaintyRegion:
    """Smallest rectangle containing both ``prev & q`` and the point ``mu``.

    When the intersection is empty the result collapses to the degenerate
    rectangle at ``mu``.
    """
    mu = np.asarray(mu, dtype=float)
    inter = intersect_regions(prev, q)
    if inter is None:
        return UncertaintyRegion(mu, mu)
    return UncertaintyRegion(np.minimum(inter.lower, mu),
                             np.maximum(inter.upper, mu))


def _stack_regions(regions) -> tuple[np.ndarray, np.ndarray]:
    lowers = np.stack([r.lower for r in regions])
    uppers = np.stack([r.upper for r in regions])
    return lowers, uppers


def classify_bounds(lowers: np.ndarray, uppers: np.ndarray,
                    epsilon=0.0) -> Classification:
    """Three-way classification from stacked rectangle corners.

    ``lowers`` and ``uppers`` are (n, q) arrays of optimistic and
    pessimistic corners.  A point joins the Pareto set when no *other*
    point's eps-shifted optimistic corner dominates its eps-shifted
    pessimistic corner; it joins the dominated set when some other point's
    shifted pessimistic corner dominates its shifted optimistic corner.
    The remainder is unclassified.
    """
    eps = np.asarray(epsilon, dtype=float)
    if np.any(eps < 0):
        raise ValueError("epsilon entries must be nonnegative")
    n = len(lowers)
    opt = lowers + eps   # R_min + eps
    pes = uppers - eps   # R_max - eps

    dom_p = domination_matrix(opt, pes)
    dom_n = domination_matrix(pes, opt)
    np.fill_diagonal(dom_p, False)  # quantifier excludes x' = x
    np.fill_diagonal(dom_n, False)

    in_p = ~dom_p.any(axis=0)
    in_n = dom_n.any(axis=0) & ~in_p
    in_u = ~(in_p | in_n)
    return Classification(np.flatnonzero(in_p), np.flatnonzero(in_n),
                          np.flatnonzero(in_u))


def classify(regions, epsilon=0.0) -> Classification:
    """Classify a sequence of :class:`UncertaintyRegion`, one per grid point."""
    if len(regions) == 0:
        raise ValueError("empty region sequence")
    lowers, uppers = _stack_regions(regions)
    return classify_bounds(lowers, uppers, epsilon)


def select_next_bounds(classification: Classification, lowers: np.ndarray,
                       uppers: np.ndarray, exclude_visited: bool = False,
                       visited=()) -> int:
    """Index of the widest-rectangle candidate in P u U.

    Diameter is the Euclidean norm of ``upper - lower``; ties break to the
    smallest grid index so that runs are reproducible.
    """
    candidates = np.concatenate([classification.pareto,
                                 classification.unclassified])
    if exclude_visited and len(candidates):
        visited = np.asarray(sorted(visited), dtype=int)
        candidates = np.setdiff1d(candidates, visited)
    if len(candidates) == 0:
        raise NoSelectablePointError("no selectable point")
    candidates = np.sort(candidates)
    diam = np.linalg.norm(uppers[candidates] - lowers[candidates], axis=1)
    return int(candidates[int(np.argmax(diam))])


def select_next(classification: Classification, regions,
                exclude_visited: bool = False, visited=()) -> int:
    lowers, uppers = _stack_regions(regions)
    return select_next_bounds(classification, lowers, uppers,
                              exclude_visited, visited)
