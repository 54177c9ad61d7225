"""Flat-torus domain primitives: periodic distance, sampling, point ingestion.

The domain is the unit torus in d dimensions. Every point is kept in the
canonical representative cube [0, 1)^d; all entry points wrap coordinates
into that cube so downstream code never has to reason about aliases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wrap(coords):
    """Wrap coordinates into the canonical cube [0, 1)^d.

    Accepts scalars or arrays; negative and out-of-range values are reduced
    modulo 1. Values that round up to exactly 1.0 (e.g. -1e-18 % 1.0) are
    mapped to 0.0 so the half-open invariant holds bitwise.
    """
    out = np.asarray(coords, dtype=float) % 1.0
    # float rounding can return the excluded endpoint
    return np.where(out >= 1.0, 0.0, out)


def torus_distance(x, y) -> float:
    """Geodesic distance between two points on the unit torus.

    Computed as the Euclidean norm of the componentwise wrapped difference
    min(|x_j - y_j|, 1 - |x_j - y_j|). Symmetric, satisfies the triangle
    inequality, and is bounded by sqrt(d)/2.
    """
    x = wrap(x)
    y = wrap(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = np.abs(x - y)
    diff = np.minimum(diff, 1.0 - diff)
    return float(np.linalg.norm(diff))


def pairwise_distances(X, Y=None) -> np.ndarray:
    """Dense matrix of torus distances between rows of X and rows of Y.

    Y defaults to X. Per-axis accumulation avoids an (n, m, d) intermediate,
    which matters at the n ~ 6000 reference scale.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = np.zeros((X.shape[0], Y.shape[0]))
    for axis in range(X.shape[1]):
        diff = np.abs(X[:, axis, None] - Y[None, :, axis])
        diff = np.minimum(diff, 1.0 - diff)
        sq += diff * diff
    return np.sqrt(sq)


@dataclass(frozen=True)
class SampleSet:
    """An ordered point cloud on the unit torus.

    The row order is stable: index i identifies the same point everywhere
    downstream (constraints, records, transport maps). ``seed`` records the
    generator seed when the set was sampled, or None for ingested data.
    """

    points: np.ndarray
    dim: int
    seed: int | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have {pts.shape[1]} columns, expected dim={self.dim}")
        pts = wrap(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n


def sample_uniform(n: int, d: int, seed: int) -> SampleSet:
    """Draw n iid points uniform on [0, 1)^d.

    The generator is Philox, a counter-based RNG with a published algorithm,
    keyed by ``seed``; the same seed always reproduces the same point list
    bit for bit within this implementation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    pts = rng.random((n, d))
    return SampleSet(points=pts, dim=d, seed=int(seed))


def load_points(path, d: int) -> SampleSet:
    """Read a point CSV (no header, d decimal columns per row).

    Coordinates are wrapped into [0, 1); row order becomes index order.
    Malformed rows, wrong column counts and non-finite values raise with the
    offending 1-based line number.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != d:
                raise ValueError(f"line {lineno}: expected {d} columns, got {len(fields)}")
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: malformed value ({exc})") from None
            if not all(np.isfinite(values)):
                raise ValueError(f"line {lineno}: non-finite coordinate")
            rows.append(values)
    if not rows:
        raise ValueError("empty point file")
    return SampleSet(points=np.array(rows, dtype=float), dim=d, seed=None)
