"""1D/2D function probes for interpolation/extrapolation studies.

Training inputs live in [-1, 1] (or its square); the evaluation grid extends
to [-4, 4] so that roughly the outer seven-eighths of it exercises
extrapolation.  Responses add N(0, 0.05^2) noise to the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data import Dataset
from ..rng import make_rng

KINDS_1D = ("linear1d", "quad1d", "step1d", "piecewise1d")
KINDS_2D = ("linear2d", "quad2d", "step2d", "bilinear2d")
KINDS = KINDS_1D + KINDS_2D

NOISE_SD = 0.05

# piecewise-linear law: 4 pieces joined at the interior quartiles of [-1, 1]
PW_BREAKS = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])


def step_1d(x):
    return np.where(x >= 0.0, 1.0, -1.0)


def step_2d(x1, x2):
    return np.where((x1 < 0.0) & (x2 < 0.0), -1.0, 1.0)


def piecewise_linear(anchor: float, slopes: np.ndarray) -> Callable:
    """Continuous piecewise-linear function on PW_BREAKS with f(-1)=anchor.

    Extends linearly beyond [-1, 1] with the terminal slopes.
    """
    knots = np.empty(5)
    knots[0] = anchor
    for k in range(4):
        knots[k + 1] = knots[k] + slopes[k] * (PW_BREAKS[k + 1] - PW_BREAKS[k])

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        seg = np.clip(np.searchsorted(PW_BREAKS, x, side="right") - 1, 0, 3)
        return knots[seg] + slopes[seg] * (x - PW_BREAKS[seg])

    return f


def bilinear_patch(values: np.ndarray) -> Callable:
    """Piecewise-bilinear surface on a 4x4 cell division of [-1, 1]^2.

    ``values`` is the 5x5 grid of cell-corner values.  A point is mapped to
    unit-square coordinates, assigned to cell (i, j), and blended from the
    four surrounding corners with local coordinates (4u - i, 4v - j).  Cell
    indices are clamped to the boundary cells, so the surface extends
    smoothly outside the square.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (5, 5):
        raise ValueError("corner-value grid must be 5x5")

    def f(x1, x2):
        u = (np.asarray(x1, dtype=np.float64) + 1.0) / 2.0
        v = (np.asarray(x2, dtype=np.float64) + 1.0) / 2.0
        i = np.clip(np.floor(4.0 * u).astype(int), 0, 3)
        j = np.clip(np.floor(4.0 * v).astype(int), 0, 3)
        lu = 4.0 * u - i
        lv = 4.0 * v - j
        return (values[i, j] * (1.0 - lu) * (1.0 - lv)
                + values[i + 1, j] * lu * (1.0 - lv)
                + values[i, j + 1] * (1.0 - lu) * lv
                + values[i + 1, j + 1] * lu * lv)

    return f


@dataclass(frozen=True)
class FunctionProbe:
    kind: str
    train: Dataset
    eval_grid: Dataset
    truth: Callable  # maps an (n, p) matrix to a length-n array
    noise_sd: float = NOISE_SD


def _make_truth_1d(kind: str, rng: np.random.Generator) -> Callable:
    if kind == "linear1d":
        g = lambda x: x
    elif kind == "quad1d":
        g = lambda x: x**2
    elif kind == "step1d":
        g = step_1d
    else:
        anchor = rng.uniform(-1.0, 1.0)
        slopes = rng.uniform(-2.0, 2.0, size=4)
        g = piecewise_linear(anchor, slopes)
    return lambda xmat: g(np.asarray(xmat, dtype=np.float64).reshape(-1))


def _make_truth_2d(kind: str, rng: np.random.Generator) -> Callable:
    if kind == "linear2d":
        g = lambda x1, x2: x1 + x2
    elif kind == "quad2d":
        g = lambda x1, x2: x1**2 + x2**2
    elif kind == "step2d":
        g = step_2d
    else:
        g = bilinear_patch(rng.uniform(-1.0, 1.0, size=(5, 5)))

    def truth(xmat):
        xmat = np.atleast_2d(np.asarray(xmat, dtype=np.float64))
        return g(xmat[:, 0], xmat[:, 1])

    return truth


def gen_function_probe(kind: str, n: int, seed: int, eval_points: int = 0) -> FunctionProbe:
    """Build one probe instance.

    Parameters
    ----------
    kind : one of the eight probe kinds
    n : training points (1D) or training mesh size per axis (2D); n >= 2
    seed : master seed covering both the random truth and the noise
    eval_points : evaluation grid size per axis (defaults: 321 in 1D, 41 in 2D)
    """
    if kind not in KINDS:
        raise ValueError(f"unknown probe kind {kind!r}")
    if n < 2:
        raise ValueError("need n >= 2 training points per axis")
    rng = make_rng(seed)
    if kind in KINDS_1D:
        truth = _make_truth_1d(kind, rng)
        x = rng.uniform(-1.0, 1.0, size=(n, 1))
        y = truth(x) + NOISE_SD * rng.standard_normal(n)
        q = eval_points or 321
        grid = Dataset(np.linspace(-4.0, 4.0, q).reshape(-1, 1))
        return FunctionProbe(kind, Dataset(x, y), grid, truth)
    truth = _make_truth_2d(kind, rng)
    ax1 = np.sort(rng.uniform(-1.0, 1.0, size=n))
    ax2 = np.sort(rng.uniform(-1.0, 1.0, size=n))
    g1, g2 = np.meshgrid(ax1, ax2, indexing="ij")
    x = np.column_stack([g1.ravel(), g2.ravel()])
    y = truth(x) + NOISE_SD * rng.standard_normal(n * n)
    q = eval_points or 41
    e1, e2 = np.meshgrid(np.linspace(-4.0, 4.0, q), np.linspace(-4.0, 4.0, q), indexing="ij")
    grid = Dataset(np.column_stack([e1.ravel(), e2.ravel()]))
    return FunctionProbe(kind, Dataset(x, y), grid, truth)
