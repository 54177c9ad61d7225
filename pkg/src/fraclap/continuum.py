"""Continuum reference solver on a periodic grid with uniform density.

With uniform density the weighted continuum operator reduces to the
(positive) negative Laplacian, which the Fourier basis diagonalizes on the
torus. Constrained minimization therefore collapses to a small saddle system
on a fractional Green's function, evaluated by FFT on the grid.

Two spectra are exposed: the 5-point finite-difference symbol
(4/h^2) * sum_axis sin^2(pi k / m), which is what the reference experiments
use, and the analytic symbol 4 pi^2 |k|^2 over integer frequencies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .torus import SampleSet, wrap

VARIANT_FD = "finite-difference"
VARIANT_ANALYTIC = "analytic"


@dataclass(frozen=True)
class PeriodicGrid:
    """Regular m^d grid on the unit torus; node (p, q, ...) sits at (p/m, q/m, ...)."""

    m: int
    d: int = 2

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.d < 1:
            raise ValueError("d must be >= 1")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.d


@dataclass(frozen=True)
class ContinuumSpectrum:
    """Laplacian eigenvalues over the grid's Fourier modes.

    ``multipliers`` has the grid shape, indexed by FFT frequency; the zero
    mode sits at the all-zeros index.
    """

    grid: PeriodicGrid
    multipliers: np.ndarray
    variant: str

    def __post_init__(self):
        self.multipliers.setflags(write=False)

    @property
    def eigenvalues(self) -> np.ndarray:
        """All m^d eigenvalues sorted ascending (zero mode first)."""
        return np.sort(self.multipliers.reshape(-1))


def continuum_spectrum(grid: PeriodicGrid, variant: str = VARIANT_FD) -> ContinuumSpectrum:
    """Eigenvalues of the periodic Laplacian on the grid's Fourier modes."""
    m = grid.m
    freqs = np.fft.fftfreq(m) * m  # integer frequencies
    mult = np.zeros(grid.shape)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = m
        k = freqs.reshape(shape)
        if variant == VARIANT_FD:
            mult = mult + (4.0 * m**2) * np.sin(math.pi * k / m) ** 2
        elif variant == VARIANT_ANALYTIC:
            mult = mult + 4.0 * math.pi**2 * k**2
        else:
            raise ValueError(f"unknown spectrum variant: {variant}")
    return ContinuumSpectrum(grid=grid, multipliers=mult, variant=variant)


def analytic_eigenvalues(count: int, d: int = 2) -> np.ndarray:
    """First ``count`` torus Laplacian eigenvalues 4 pi^2 |k|^2, k in Z^d, sorted.

    Brute-force lattice enumeration with multiplicity; rank 1 is the zero
    mode. Used as the continuum axis of the eigenfunction growth study.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    # enlarge the search radius until enough lattice points are enclosed
    radius2 = max(4.0, (count / math.pi) if d == 2 else count ** (2.0 / d))
    while True:
        K = int(math.isqrt(int(radius2))) + 1
        norms = np.zeros(1)
        for axis in range(d):
            k = np.arange(-K, K + 1, dtype=float)
            norms = (norms[:, None] + (k**2)[None, :]).reshape(-1)
        norms = norms[norms <= radius2]
        if norms.shape[0] >= count:
            return 4.0 * math.pi**2 * np.sort(norms)[:count]
        radius2 *= 2.0


def fractional_green(spec: ContinuumSpectrum, s: float) -> np.ndarray:
    """Grid kernel of the fractional inverse off the constant mode.

    g(z) = sum_{modes != 0} lambda^{-s} cos(2 pi k . z), evaluated by inverse
    FFT of the spectral multipliers with the zero mode removed. Real, even,
    and mean-zero over the grid.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    lam = spec.multipliers
    mult = np.zeros_like(lam)
    nonzero = lam > 0
    mult[nonzero] = lam[nonzero] ** (-s)
    g = np.fft.ifftn(mult) * lam.size
    return np.real(g)


def snap_to_grid(point, m: int) -> tuple:
    """Nearest grid node index of a torus point; ties break toward the lower index."""
    x = wrap(np.asarray(point, dtype=float).reshape(-1))
    idx = np.ceil(x * m - 0.5).astype(int) % m
    return tuple(int(i) for i in idx)


def solve_continuum_constrained(spec: ContinuumSpectrum, constraints, s: float) -> np.ndarray:
    """Constrained minimizer of the continuum fractional energy on the grid.

    ``constraints`` is a sequence of (point, label) pairs; points snap to
    their nearest grid node and two constraints landing on the same node are
    rejected. The saddle system uses G_ij = g(z_i - z_j) (translation
    invariance) and the constant mode b = 1; the solution is
    u = c_1 + sum_i mu_i g(. - z_i).
    """
    grid = spec.grid
    g = fractional_green(spec, s)
    nodes = []
    labels = []
    for point, label in constraints:
        node = snap_to_grid(point, grid.m)
        if node in nodes:
            raise ValueError(f"snapping collision: two constraints map to grid node {node}")
        nodes.append(node)
        labels.append(float(label))
    N = len(nodes)
    if N < 1:
        raise ValueError("at least one constraint required")

    G = np.empty((N, N))
    for i, zi in enumerate(nodes):
        for j, zj in enumerate(nodes):
            diff = tuple((a - b) % grid.m for a, b in zip(zi, zj))
            G[i, j] = g[diff]
    saddle = np.zeros((N + 1, N + 1))
    saddle[:N, :N] = G
    saddle[:N, N] = 1.0
    saddle[N, :N] = 1.0
    rhs = np.concatenate([labels, [0.0]])
    try:
        sol = np.linalg.solve(saddle, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"singular saddle system: {exc}") from exc
    mu, c1 = sol[:N], sol[N]

    u = np.full(grid.shape, c1)
    for coef, node in zip(mu, nodes):
        u = u + coef * np.roll(g, shift=node, axis=tuple(range(grid.d)))
    return u


def continuum_energy(spec: ContinuumSpectrum, grid_fn: np.ndarray, s: float) -> float:
    """Spectral energy sum_k lambda_k^s |<u, phi_k>|^2 of a grid function."""
    if s <= 0:
        raise ValueError("s must be positive")
    coeffs = np.fft.fftn(grid_fn) / grid_fn.size
    lam = spec.multipliers
    powers = np.zeros_like(lam)
    nonzero = lam > 0
    powers[nonzero] = lam[nonzero] ** s
    return float(np.sum(powers * np.abs(coeffs) ** 2))


def _catmull_rom_weights(t: np.ndarray) -> np.ndarray:
    """Catmull-Rom cubic weights for the 4-point stencil at offsets -1..2."""
    t2 = t * t
    t3 = t2 * t
    w = np.empty((4,) + t.shape)
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t)
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0)
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t)
    w[3] = 0.5 * (t3 - t2)
    return w


def interpolate(grid_fn: np.ndarray, queries, scheme: str = "bicubic") -> np.ndarray:
    """Periodic interpolation of a grid function at torus query points.

    ``bilinear`` is tensor-product linear; ``bicubic`` is tensor-product
    Catmull-Rom with a periodic stencil. Both reproduce grid values exactly
    at grid nodes. Works in any dimension matching the grid function.
    """
    if not np.all(np.isfinite(grid_fn)):
        raise ValueError("grid function must be finite everywhere")
    if isinstance(queries, SampleSet):
        pts = queries.points
    else:
        pts = wrap(np.atleast_2d(np.asarray(queries, dtype=float)))
    d = grid_fn.ndim
    if pts.shape[1] != d:
        raise ValueError(f"queries have dimension {pts.shape[1]}, grid has {d}")
    m = grid_fn.shape[0]
    scaled = pts * m
    base = np.floor(scaled).astype(int)
    frac = scaled - base

    if scheme == "bilinear":
        offsets = (0, 1)
        weights = [np.stack([1.0 - frac[:, ax], frac[:, ax]]) for ax in range(d)]
    elif scheme == "bicubic":
        offsets = (-1, 0, 1, 2)
        weights = [_catmull_rom_weights(frac[:, ax]) for ax in range(d)]
    else:
        raise ValueError(f"unknown interpolation scheme: {scheme}")

    out = np.zeros(pts.shape[0])
    for combo in itertools.product(range(len(offsets)), repeat=d):
        idx = tuple(
            (base[:, ax] + offsets[combo[ax]]) % m for ax in range(d)
        )
        w = np.ones(pts.shape[0])
        for ax in range(d):
            w = w * weights[ax][combo[ax]]
        out += w * grid_fn[idx]
    return out


def l2_mu_n_error(u_n, u_at_nodes) -> float:
    """Empirical L2 error sqrt((1/n) sum_i (u_n(x_i) - u(x_i))^2)."""
    u_n = np.asarray(u_n, dtype=float).reshape(-1)
    u = np.asarray(u_at_nodes, dtype=float).reshape(-1)
    if u_n.shape != u.shape:
        raise ValueError(f"length mismatch: {u_n.shape[0]} vs {u.shape[0]}")
    return float(np.sqrt(np.mean((u_n - u) ** 2)))
