"""Eigendecomposition under the L2(mu_n) inner product and fractional energies.

All spectral quantities live in the empirical inner product
<u, v> = (1/n) sum_i u(x_i) v(x_i), so eigenvectors carry Euclidean norm
sqrt(n). Keeping that normalization native removes stray 1/n factors from
every downstream formula (energy decomposition, Green matrices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# eigenvalues at or below this are treated as the kernel (constant) mode;
# lambda^s for such lambda is defined as 0 for every s > 0
ZERO_MODE_TOL = 1e-12

# spectral gap below this means the zero eigenvalue has multiplicity > 1
CONNECTED_GAP_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ordered eigenpairs of a graph Laplacian in L2(mu_n).

    ``eigenvalues`` ascend; column k of ``eigenvectors`` is the k-th
    eigenfunction, normalized to unit L2(mu_n) norm with its first
    nonvanishing component positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        """Spectral coefficients <u, psi_k> in L2(mu_n), for all k."""
        u = _check_node_function(u, self.n)
        return self.eigenvectors.T @ u / self.n


def _check_node_function(u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != n:
        raise ValueError(f"node function has length {u.shape[0]}, expected {n}")
    return u


def eigendecompose(laplacian: np.ndarray) -> SpectralDecomposition:
    """Full dense eigendecomposition of a symmetric Laplacian matrix.

    Eigenvectors are rescaled by sqrt(n) so that their L2(mu_n) norm is one,
    and sign-fixed so the first component of absolute value above 1e-12 is
    positive. Ties inside degenerate eigenspaces keep the solver's output
    order.
    """
    A = np.asarray(laplacian, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("laplacian must be a square matrix")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > 1e-10 * scale:
        raise ValueError("laplacian is not symmetric")
    try:
        vals, vecs = np.linalg.eigh((A + A.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed to converge: {exc}") from exc
    n = A.shape[0]
    vecs = vecs * np.sqrt(n)
    for k in range(n):
        col = vecs[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            vecs[:, k] = -col
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs)


def inner_product(u, v) -> float:
    """Empirical inner product (1/n) * sum_i u_i v_i."""
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(u @ v) / u.shape[0]


def _multipliers(eigenvalues: np.ndarray, s: float) -> np.ndarray:
    """lambda^s with the kernel-mode convention lambda^s = 0 for tiny lambda."""
    if s == 0:
        return np.ones_like(eigenvalues)
    lam = np.where(eigenvalues > ZERO_MODE_TOL, eigenvalues, 1.0)
    out = lam**s
    return np.where(eigenvalues > ZERO_MODE_TOL, out, 0.0)


def fractional_energy(spec: SpectralDecomposition, u, s: float) -> float:
    """Fractional Dirichlet energy sum_k lambda_k^s <u, psi_k>^2.

    Nonnegative; vanishes for constants on a connected graph. Agrees with
    (1/n) u^T Lap^s u for integer s.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    coeffs = spec.coefficients(u)
    return float(np.sum(_multipliers(spec.eigenvalues, s) * coeffs**2))


def apply_fractional(spec: SpectralDecomposition, u, s: float) -> np.ndarray:
    """Apply the fractional operator: sum_k lambda_k^s <u, psi_k> psi_k.

    s = 0 resolves the identity and returns u expanded in the full basis;
    fractional_energy(u, s) == inner_product(u, apply_fractional(u, s)).
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    coeffs = spec.coefficients(u)
    return spec.eigenvectors @ (_multipliers(spec.eigenvalues, s) * coeffs)
