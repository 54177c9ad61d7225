"""Exact constrained minimization of the fractional graph energy.

The minimizer of E^(s) subject to pointwise values at labeled nodes is
computed exactly through a Lagrange saddle system built on the Green matrix
G_ij = sum_{k>=2} lambda_k^{-s} psi_k(x_i) psi_k(x_j) over the constrained
nodes. The zero eigenvalue never enters: the constant-mode coefficient is a
free unknown pinned by the orthogonality row of the saddle system, not by
ridge regularization, so the discrete minimizer is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .spectral import CONNECTED_GAP_TOL, ZERO_MODE_TOL, SpectralDecomposition


@dataclass(frozen=True)
class ConstraintSet:
    """Labeled nodes: 0-based node indices with real label values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int).reshape(-1)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if idx.shape[0] != vals.shape[0]:
            raise ValueError("indices and values must have equal length")
        if idx.shape[0] < 1:
            raise ValueError("at least one constraint required")
        if np.any(idx < 0):
            raise ValueError("node indices must be nonnegative")
        if np.unique(idx).shape[0] != idx.shape[0]:
            raise ValueError("duplicate constraint indices")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, float]]) -> "ConstraintSet":
        pairs = list(pairs)
        return cls(
            indices=np.array([p[0] for p in pairs], dtype=int),
            values=np.array([p[1] for p in pairs], dtype=float),
        )

    @property
    def size(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class LabelFunction:
    """A solved node function with its cached energy and exponent."""

    values: np.ndarray
    energy: float
    s: float

    def __post_init__(self):
        self.values.setflags(write=False)


def solve_constrained(
    spec: SpectralDecomposition, constraints: ConstraintSet, s: float
) -> LabelFunction:
    """Unique minimizer of E^(s) matching all pointwise constraints.

    Requires a connected graph (spectral gap above 1e-10). Solves the
    (N+1) x (N+1) saddle system

        [G  b] [mu ]   [labels]
        [b' 0] [c_1] = [  0   ]

    with b_i = psi_1(x_i), then reconstructs
    u = c_1 psi_1 + sum_{k>=2} lambda_k^{-s} (sum_i mu_i psi_k(x_i)) psi_k.
    The optimal energy is mu' G mu.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    n = spec.n
    if np.any(constraints.indices >= n):
        raise ValueError("constraint index out of range")
    lam = spec.eigenvalues
    if n > 1 and lam[1] <= CONNECTED_GAP_TOL:
        raise ValueError("zero eigenvalue multiplicity: graph is disconnected")

    nonzero = lam > ZERO_MODE_TOL
    idx = constraints.indices
    ell = constraints.values
    N = constraints.size

    Vc = spec.eigenvectors[np.ix_(idx, np.nonzero(nonzero)[0])]  # (N, n-1)
    w = lam[nonzero] ** (-s)
    G = (Vc * w) @ Vc.T
    b = spec.eigenvectors[idx, 0]

    saddle = np.zeros((N + 1, N + 1))
    saddle[:N, :N] = G
    saddle[:N, N] = b
    saddle[N, :N] = b
    rhs = np.concatenate([ell, [0.0]])
    try:
        sol = np.linalg.solve(saddle, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"singular saddle system: {exc}") from exc
    mu, c1 = sol[:N], sol[N]

    coeffs = w * (Vc.T @ mu)  # lambda^{-s} sum_i mu_i psi_k(x_i), k >= 2
    u = c1 * spec.eigenvectors[:, 0] + spec.eigenvectors[:, nonzero] @ coeffs
    energy = float(mu @ G @ mu)
    return LabelFunction(values=u, energy=max(energy, 0.0), s=float(s))


def brute_force_oracle(
    laplacian: np.ndarray, constraints: ConstraintSet, s: int
) -> np.ndarray:
    """Independent dense check of the constrained minimizer for integer s.

    Forms M = Lap^s by repeated matrix multiplication and solves the
    stationarity condition M_FF u_F = -M_FC ell of minimizing (1/n) u'Mu at
    fixed constrained values. Intended for n up to a few hundred.
    """
    if int(s) != s or s < 1:
        raise ValueError("oracle covers positive integer s only")
    A = np.asarray(laplacian, dtype=float)
    n = A.shape[0]
    if np.any(constraints.indices >= n):
        raise ValueError("constraint index out of range")
    M = A.copy()
    for _ in range(int(s) - 1):
        M = M @ A
    fixed = constraints.indices
    free = np.setdiff1d(np.arange(n), fixed)
    u = np.zeros(n)
    u[fixed] = constraints.values
    if free.size:
        Mff = M[np.ix_(free, free)]
        rhs = -M[np.ix_(free, fixed)] @ constraints.values
        try:
            u[free] = np.linalg.solve(Mff, rhs)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(
                f"singular free-block system (disconnected graph?): {exc}"
            ) from exc
    return u


def classify(u, threshold: float = 0.5) -> np.ndarray:
    """Binary decision rule: 0 where u < threshold, 1 otherwise."""
    u = np.asarray(u, dtype=float)
    return np.where(u < threshold, 0, 1)
