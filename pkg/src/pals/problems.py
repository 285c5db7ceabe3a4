"""Benchmark problems g1-g9: test functions, scaling, noise and ground truth.

The search space of every problem is the 21 x 21 regular grid on [0, 1]^2,
indexed row-major with x1 as the slow axis: ``index = i1 * 21 + i2`` and
``point = (i1 / 20, i2 / 20)``.

Each objective is scaled affinely to [0, 1] using its min/max over the
(shifted) grid, so the scaled values attain 0 and 1 exactly.  Noise
variances are specified in raw (pre-scaling) units and pass through the
same affine map, i.e. the scaled noise sd is ``sigma_raw / (max - min)``.

The Branin and Rosenbrock inputs are mapped affinely from [0, 1]^2 onto
calibrated boxes (see BRANIN_BOX / ROSENBROCK_BOX); the remaining functions
are evaluated directly on the unit square.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .pareto import pareto_indices_2d

GRID_SIDE = 21
GRID_SIZE = GRID_SIDE * GRID_SIDE

# Input boxes for the two classical test functions, calibrated so that the
# Pareto-set cardinalities of g2, g3 and g4 on the 21x21 grid are 10, 12
# and 7 respectively.
BRANIN_BOX = ((2.5, 10.0), (-1.5, 15.0))
ROSENBROCK_BOX = ((0.25, 2.0), (0.25, 2.0))

# Third-degree polynomial coefficients c1..c10 for f6..f15.
POLY_COEFFS = {
    "f6": (0.36, 8.1, 7.5, -83, 26, -80, -440, 94, 920, 930),
    "f7": (0.68, -9.4, 9.1, -2.9, -60, 72, 160, -830, -580, -920),
    "f8": (0.094, -7.2, 7, 49, 68, -49, 630, -510, 860, -300),
    "f9": (0.61, 5, 2.3, -5.3, 30, -66, -170, -99, -830, 430),
    "f10": (-0.38, 8.5, 1.4, 63, 81, 96, -120, -780, -480, -180),
    "f11": (-0.19, 4.8, 2.1, 42, 56, 77, 410, 360, 150, -16),
    "f12": (0.78, 6, -4.7, 90, -85, -82, 600, 890, 370, -740),
    "f13": (-0.45, 7.8, -7.7, 28, 34, -31, -500, -170, -480, 530),
    "f14": (-0.45, -9.3, -3.5, 14, -9.7, 22, -880, -370, 550, 390),
    "f15": (0.75, 7.4, -8.2, -98, 15, -31, -450, -62, 780, -260),
}


@dataclass(frozen=True)
class InputGrid:
    """The finite search space as an indexed point list."""

    points: np.ndarray  # (GRID_SIZE, 2)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@functools.lru_cache(maxsize=1)
def make_grid() -> InputGrid:
    ticks = np.linspace(0.0, 1.0, GRID_SIDE)
    pts = np.array([(a, b) for a in ticks for b in ticks])
    pts.setflags(write=False)
    return InputGrid(pts)


def _poly3(cid: str, x1, x2):
    c = POLY_COEFFS[cid]
    return (c[0] + c[1] * x1 + c[2] * x2 + c[3] * x1 * x2
            + c[4] * x1**2 + c[5] * x2**2 + c[6] * x1**2 * x2
            + c[7] * x1 * x2**2 + c[8] * x1**3 + c[9] * x2**3)


def eval_raw(function_id: str, x) -> np.ndarray:
    """Evaluate a test function at points ``x`` of shape (n, 2) or (2,).

    Inputs may fall outside the unit square after shifting; formulas extend
    naturally.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = pts[:, 0], pts[:, 1]
    if function_id == "f1":
        out = (780000 + 110000 * x1 - 12000 * x2 - 36000 * x1 * x2
               + 280000 * x1**2 + 50000 * x2**2)
    elif function_id == "f2":
        out = (0.83 + 0.17 * x1 - 0.015 * x2 - 0.0038 * x1 * x2
               + 0.061 * x1**2 + 0.0011 * x2**2)
    elif function_id == "f3":
        out = (np.exp(0.36 * (x1 + x2)) + 0.6 * x1 + 1.2 * x2**2
               + 3 * np.sin(0.8 * np.pi * x1))
    elif function_id == "f4":
        (l1, h1), (l2, h2) = BRANIN_BOX
        u1 = l1 + (h1 - l1) * x1
        u2 = l2 + (h2 - l2) * x2
        a = 5.1 / (4 * np.pi**2)
        b = 5 / np.pi
        out = (u2 - a * u1**2 + b * u1 - 6) ** 2 + 10 * np.cos(u1) + 10
    elif function_id == "f5":
        (l1, h1), (l2, h2) = ROSENBROCK_BOX
        u1 = l1 + (h1 - l1) * x1
        u2 = l2 + (h2 - l2) * x2
        out = 100 * (u2 - u1**2) ** 2 + (1 - u1) ** 2
    elif function_id in POLY_COEFFS:
        out = _poly3(function_id, x1, x2)
    else:
        raise KeyError(f"unknown function id {function_id!r}")
    return out if np.asarray(x).ndim > 1 else float(out[0])


def scale_to_unit(function_id: str, shift, grid: InputGrid):
    """Scaled objective over the grid: ``(f(x - x0) - min) / (max - min)``.

    Returns ``(values, vmin, vmax)`` with min/max taken over the shifted
    function's values on the grid, so the scaled values attain 0 and 1.
    """
    shift = np.asarray(shift, dtype=float)
    raw = eval_raw(function_id, grid.points - shift)
    vmin, vmax = float(raw.min()), float(raw.max())
    if vmax == vmin:
        raise ValueError("degenerate objective: max equals min on the grid")
    return (raw - vmin) / (vmax - vmin), vmin, vmax


@dataclass(frozen=True)
class ProblemSpec:
    """A bi-objective benchmark problem on the 21 x 21 grid."""

    name: str
    objective_ids: tuple[str, str]
    shifts: tuple[tuple[float, float], tuple[float, float]]
    noise_variances: tuple[float, float]  # raw (pre-scaling) units
    values: np.ndarray        # (GRID_SIZE, 2) scaled noiseless objectives
    scale_ranges: np.ndarray  # (2,) max - min per objective, raw units
    pareto_set: np.ndarray    # indices of the true Pareto set
    pareto_front: np.ndarray  # scaled objective values of the Pareto set

    @property
    def grid(self) -> InputGrid:
        return make_grid()

    @property
    def scaled_noise_sd(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.noise_variances)) / self.scale_ranges

    def with_noise_variances(self, variances) -> "ProblemSpec":
        """Same problem with the raw noise variances replaced."""
        v = tuple(float(s) for s in variances)
        return ProblemSpec(self.name, self.objective_ids, self.shifts, v,
                           self.values, self.scale_ranges,
                           self.pareto_set, self.pareto_front)


_PROBLEM_TABLE = {
    # name: (f_a, f_b, sigma1^2, sigma2^2, shift_a, shift_b)
    "g1": ("f1", "f2", 3.6e9, 3.9e-3, (0, 0), (0, 0)),
    "g2": ("f4", "f3", 3.1e2, 4.8e3, (0, 0), (0, 0)),
    "g3": ("f4", "f5", 3.1e2, 5.7e8, (0, 0), (0, 0)),
    "g4": ("f3", "f5", 4.8e3, 5.7e8, (0, 0), (0, 0)),
    "g5": ("f6", "f7", 7.0e2, 5.6e3, (0.5, 0.5), (0.5, 0.5)),
    "g6": ("f8", "f9", 5.8e2, 3.1e3, (0.5, 0.5), (0.5, 0.5)),
    "g7": ("f10", "f11", 2.1e3, 3.2e2, (0.5, 0.5), (0.5, 0.5)),
    # g8 shifts objective 1 by (0.3, 0.8) and objective 2 by (0.6, 0.6)
    "g8": ("f12", "f13", 1.4e4, 1.6e3, (0.3, 0.8), (0.6, 0.6)),
    "g9": ("f14", "f15", 3.7e3, 2.0e4, (0.3, 0.8), (0.3, 0.8)),
}

PROBLEM_NAMES = tuple(_PROBLEM_TABLE)


@functools.lru_cache(maxsize=None)
def get_problem(name: str) -> ProblemSpec:
    if name not in _PROBLEM_TABLE:
        raise KeyError(f"unknown problem {name!r}")
    fa, fb, s1, s2, sha, shb = _PROBLEM_TABLE[name]
    grid = make_grid()
    va, lo_a, hi_a = scale_to_unit(fa, sha, grid)
    vb, lo_b, hi_b = scale_to_unit(fb, shb, grid)
    values = np.column_stack([va, vb])
    values.setflags(write=False)
    idx = pareto_indices_2d(values)
    idx.setflags(write=False)
    front = values[idx].copy()
    front.setflags(write=False)
    ranges = np.array([hi_a - lo_a, hi_b - lo_b])
    ranges.setflags(write=False)
    return ProblemSpec(name, (fa, fb), (sha, shb), (s1, s2),
                       values, ranges, idx, front)


def ground_truth(problem: ProblemSpec):
    """True Pareto set indices and front (cached on the spec)."""
    return problem.pareto_set, problem.pareto_front


def sample_noisy(problem: ProblemSpec, index: int, k: int,
                 rng: np.random.Generator) -> np.ndarray:
    """k noisy scaled evaluations at a grid index, shape (k, 2)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    mean = problem.values[index]
    sd = problem.scaled_noise_sd
    return mean + sd * rng.standard_normal((k, 2))
