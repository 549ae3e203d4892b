"""Clustering as a two-part code: cluster centers, then per-point offsets.

All coordinates live on a grid of pitch ``delta``; every grid integer is
written with the signed Elias gamma code. Total length of a coding::

    sum over centers of gamma(center coords)
    + n * log2(number of centers)            # which cluster each point is in
    + sum over points of gamma(offset from its center)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DomainError
from ..prob_model import signed_gamma_length


def quantize(values, delta: float) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=float) / delta + 0.5).astype(np.int64)


@dataclass(frozen=True)
class ClusterCoding:
    centers: tuple[tuple[int, ...], ...]  # grid coordinates
    assignments: tuple[int, ...]
    delta: float
    center_bits: int
    naming_bits: float
    residual_bits: int

    @property
    def total_bits(self) -> float:
        return self.center_bits + self.naming_bits + self.residual_bits

    @property
    def k(self) -> int:
        return len(self.centers)

    def center_points(self) -> list[tuple[float, ...]]:
        return [tuple(c * self.delta for c in center) for center in self.centers]


def _gamma_sum(grid: np.ndarray) -> int:
    return sum(signed_gamma_length(int(z)) for z in grid.ravel())


def coding_bits(points, centers, assignments, delta: float) -> tuple[int, float, int]:
    """``(center bits, naming bits, residual bits)`` of a coding."""
    grid = quantize(np.atleast_2d(np.asarray(points, dtype=float)), delta)
    centers = np.asarray(centers, dtype=np.int64).reshape(len(centers), grid.shape[1])
    offsets = grid - centers[np.asarray(assignments)]
    naming = len(grid) * math.log2(len(centers))
    return _gamma_sum(centers), naming, _gamma_sum(offsets)


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 100) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min(((x[:, None, :] - np.array(centers)[None]) ** 2).sum(-1), axis=1)
        if d2.sum() == 0:
            centers.append(centers[-1])
        else:
            centers.append(x[rng.choice(len(x), p=d2 / d2.sum())])
    centers = np.array(centers)
    for _ in range(iters):
        labels = np.argmin(((x[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
        new = np.array([x[labels == j].mean(axis=0) if np.any(labels == j) else centers[j] for j in range(k)])
        if np.allclose(new, centers):
            break
        centers = new
    return centers


def _coding_for(grid: np.ndarray, centers_real: np.ndarray, delta: float) -> ClusterCoding:
    centers = np.unique(quantize(centers_real, delta), axis=0)
    # each point goes to the center giving it the shortest offset code
    costs = np.array([[_gamma_sum(g - c) for c in centers] for g in grid])
    labels = np.argmin(costs, axis=1)
    used = sorted(set(labels.tolist()))
    remap = {old: new for new, old in enumerate(used)}
    centers = centers[used]
    labels = np.array([remap[l] for l in labels.tolist()])
    c_bits, naming, r_bits = coding_bits(grid * delta, centers, labels, delta)
    return ClusterCoding(tuple(tuple(int(v) for v in c) for c in centers), tuple(int(l) for l in labels),
                         delta, c_bits, naming, r_bits)


def mdl_cluster(points: Sequence[Sequence[float]], max_centers: int, delta: float,
                seed: int = 0, restarts: int = 4) -> ClusterCoding:
    """Shortest coding over 1..max_centers centers (fewest centers on ties)."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    if max_centers < 1:
        raise DomainError("max_centers must be at least 1")
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(x) == 0:
        raise DomainError("need at least one point")
    grid = quantize(x, delta)
    best = None
    for k in range(1, min(max_centers, len(x)) + 1):
        for r in range(restarts):
            rng = np.random.default_rng([seed, k, r])
            coding = _coding_for(grid, _kmeans(x, k, rng), delta)
            if best is None or coding.total_bits < best.total_bits or (
                coding.total_bits == best.total_bits and coding.k < best.k
            ):
                best = coding
    return best
