"""Deterministic sample grids over chart boxes."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

Box = Sequence[tuple[float, float]]


def axis_samples(lo: float, hi: float, n: int, margin: float = 1e-3) -> np.ndarray:
    """``n`` evenly spaced samples of ``[lo + margin, hi - margin]``."""
    a, b = lo + margin, hi - margin
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("axis bounds must be finite; clip unbounded axes first")
    if b < a:
        raise ValueError(f"interval ({lo}, {hi}) is narrower than twice the margin")
    if n == 1:
        return np.array([(a + b) / 2.0])
    return np.linspace(a, b, n)


def uniform_grid(box: Box, n: int | Sequence[int], margin: float = 1e-3,
                 seed: int | None = None) -> np.ndarray:
    """Tensor grid with ``n`` points per axis, shrunk by ``margin``.

    With ``seed`` every point is jittered by up to a quarter of the local
    spacing, which keeps points inside the shrunken box.
    """
    counts = [n] * len(box) if isinstance(n, int) else list(n)
    if len(counts) != len(box):
        raise ValueError("one count per axis required")
    axes = [axis_samples(lo, hi, k, margin) for (lo, hi), k in zip(box, counts)]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(box))
    if seed is not None:
        rng = np.random.default_rng(seed)
        spacing = np.array([(ax[-1] - ax[0]) / max(len(ax) - 1, 1) for ax in axes])
        pts = pts + rng.uniform(-0.25, 0.25, size=pts.shape) * spacing
    return pts


def product_points(base: np.ndarray, fiber: np.ndarray) -> np.ndarray:
    """All concatenations (b, q) of base points with fiber points."""
    base = np.atleast_2d(base)
    fiber = np.atleast_2d(fiber)
    return np.array([np.concatenate([b, q]) for b in base for q in fiber])


def random_points(box: Box, count: int, seed: int, margin: float = 1e-3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo = np.array([a + margin for a, _ in box])
    hi = np.array([b - margin for _, b in box])
    return lo + (hi - lo) * rng.random((count, len(box)))
