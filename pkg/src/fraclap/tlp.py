"""Exact TL2 distance between equal-size empirical function pairs.

The distance couples spatial and value discrepancies: the cost of matching
atom i to atom j is torus_distance(x_i, y_j)^2 + (u_i - v_j)^2, minimized
exactly over permutations by a linear assignment solve. Following the
displayed definition, no square root is taken of the averaged optimal cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .torus import SampleSet, pairwise_distances


@dataclass(frozen=True)
class EmpiricalPair:
    """Empirical measure (uniform weights 1/n) together with node values."""

    points: SampleSet
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != self.points.n:
            raise ValueError("values length must match the number of points")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.points.n


def tl2_cost_matrix(a: EmpiricalPair, b: EmpiricalPair) -> np.ndarray:
    spatial = pairwise_distances(a.points.points, b.points.points)
    value = a.values[:, None] - b.values[None, :]
    return spatial**2 + value**2


def tl2_distance(a: EmpiricalPair, b: EmpiricalPair) -> float:
    """Exact TL2 distance between two equal-size empirical pairs.

    (1/n) * min over permutations pi of
    sum_i [torus_distance(x_i, y_pi(i))^2 + (u_i - v_pi(i))^2].
    """
    if a.n != b.n:
        raise ValueError(f"empirical measures must have equal size: {a.n} vs {b.n}")
    cost = tl2_cost_matrix(a, b)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum()) / a.n


def nearest_transport_map(source: SampleSet, target: SampleSet):
    """Map each source point to its torus-nearest target point.

    A diagnostic heuristic, not an optimal map. Returns the index map and
    the sup displacement max_i torus_distance(x_i, T(x_i)).
    """
    if source.n < 1 or target.n < 1:
        raise ValueError("both point sets must be nonempty")
    if source.dim != target.dim:
        raise ValueError("dimension mismatch")
    dist = pairwise_distances(source.points, target.points)
    indices = np.argmin(dist, axis=1)
    sup_displacement = float(dist[np.arange(source.n), indices].max())
    return indices, sup_displacement
