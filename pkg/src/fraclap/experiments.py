"""Drivers for the transition study and the eigenfunction growth study.

The transition study sweeps (n, eps) over random geometric graphs, compares
each discrete constrained minimizer against the continuum grid solution, and
locates the eps where the error curve turns over: the maximizer of the first
derivative (eps_hat) and the minimizer of the second derivative (eps_star)
of the smoothed error in log-eps, both restricted above the error minimizer.

The growth study builds each graph at its exact connectivity radius and
tracks sup norms of eigenvectors across four spectral windows k ~ alpha *
eps^{-d/4}, alpha * eps^{-d/2}, alpha * eps^{-d} and k = n, regressing peak
sup norms against the analytic continuum eigenvalue at the same rank.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .continuum import (
    PeriodicGrid,
    analytic_eigenvalues,
    continuum_spectrum,
    interpolate,
    l2_mu_n_error,
    solve_continuum_constrained,
)
from .graph import (
    Kernel,
    build_weight_matrix,
    graph_laplacian,
    is_connected,
    mst_bottleneck,
)
from .solver import ConstraintSet, solve_constrained
from .spectral import eigendecompose
from .torus import SampleSet, pairwise_distances, sample_uniform, wrap

logger = logging.getLogger(__name__)

DEFAULT_LABELS = (((0.1, 0.1), 0.0), ((0.9, 0.9), 1.0))


def derive_seed(base_seed: int, *keys: int) -> int:
    """Deterministic 64-bit seed for the task addressed by ``keys``."""
    ss = np.random.SeedSequence([int(base_seed)] + [int(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])


def worker_count() -> int:
    """Worker pool size; FRACLAP_THREADS caps it, default machine parallelism."""
    env = os.environ.get("FRACLAP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one transition-study run.

    The eps grid is either ``eps_values`` verbatim, or ``eps_count``
    geometric points from ``eps_lo_factor`` times the mean connectivity
    radius at each n up to ``eps_hi_factor * n^(-1/(2s))``.
    """

    n_values: tuple
    s: float = 16.0
    reps: int = 10
    base_seed: int = 0
    labels: tuple = DEFAULT_LABELS
    dim: int = 2
    grid_m: int = 100
    eps_values: tuple | None = None
    eps_lo_factor: float = 1.05
    eps_hi_factor: float = 3.0
    eps_count: int = 40
    bandwidth: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        labels = tuple((tuple(float(c) for c in p), float(v)) for p, v in self.labels)
        object.__setattr__(self, "labels", labels)
        if self.eps_values is not None:
            eps = tuple(sorted(float(e) for e in self.eps_values))
            if any(e <= 0 for e in eps):
                raise ValueError("all eps values must be positive")
            object.__setattr__(self, "eps_values", eps)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.s <= 0:
            raise ValueError("s must be positive")
        if not self.n_values:
            raise ValueError("n_values must be nonempty")
        if any(n <= len(labels) for n in self.n_values):
            raise ValueError("every n must exceed the number of labeled points")


@dataclass(frozen=True)
class SweepRecord:
    """One (n, eps, rep) outcome; err and energy are NaN iff not connected."""

    n: int
    eps: float
    rep: int
    seed: int
    connected: bool
    err: float
    energy: float

    def __post_init__(self):
        if self.connected and not (np.isfinite(self.err) and self.err >= 0):
            raise ValueError("connected records must carry a finite nonnegative err")
        if not self.connected and np.isfinite(self.err):
            raise ValueError("disconnected records must not carry an err")


@dataclass(frozen=True)
class TransitionResult:
    """Detected transition for one n; the search is restricted above eps_argmin."""

    n: int
    eps_argmin: float
    eps_hat: float
    eps_star: float

    def __post_init__(self):
        if self.eps_argmin > self.eps_hat or self.eps_argmin > self.eps_star:
            raise ValueError("transition points must lie at or above the error minimizer")


def _instance_points(cfg: SweepConfig, n: int, rep: int):
    """Sample points for one instance; labeled positions are nodes 0..N-1."""
    seed = derive_seed(cfg.base_seed, n, rep)
    label_pts = np.array([p for p, _ in cfg.labels], dtype=float)
    n_random = n - label_pts.shape[0]
    random_pts = sample_uniform(n_random, cfg.dim, seed).points
    return seed, SampleSet(points=np.vstack([wrap(label_pts), random_pts]), dim=cfg.dim)


def eps_grid(cfg: SweepConfig, n: int, mean_radius: float) -> np.ndarray:
    if cfg.eps_values is not None:
        return np.array(cfg.eps_values)
    lo = cfg.eps_lo_factor * mean_radius
    hi = cfg.eps_hi_factor * n ** (-1.0 / (2.0 * cfg.s))
    if hi <= lo:
        raise ValueError(f"degenerate eps range at n={n}: [{lo}, {hi}]")
    return np.geomspace(lo, hi, cfg.eps_count)


def continuum_reference(cfg: SweepConfig) -> np.ndarray:
    """Continuum minimizer on the reference grid, shared by the whole sweep."""
    spec = continuum_spectrum(PeriodicGrid(m=cfg.grid_m, d=cfg.dim), "finite-difference")
    return solve_continuum_constrained(spec, cfg.labels, cfg.s)


def run_sweep(cfg: SweepConfig) -> list:
    """Run the full (n, rep, eps) sweep; deterministic given the config.

    Disconnected instances are recorded with connected=False and skipped;
    a per-record numerical failure is logged and likewise recorded as
    unusable instead of aborting the sweep. Records come back sorted by
    (n, eps, rep).
    """
    kernel = Kernel.indicator()
    u_grid = continuum_reference(cfg)
    constraint = ConstraintSet(
        indices=np.arange(len(cfg.labels)), values=[v for _, v in cfg.labels]
    )

    instances = {}
    radii = {}
    for n in cfg.n_values:
        for rep in range(cfg.reps):
            seed, points = _instance_points(cfg, n, rep)
            instances[(n, rep)] = (seed, points)
            radii[(n, rep)] = mst_bottleneck(pairwise_distances(points.points))
    grids = {
        n: eps_grid(cfg, n, float(np.mean([radii[(n, r)] for r in range(cfg.reps)])))
        for n in cfg.n_values
    }

    def job(task):
        n, rep = task
        seed, points = instances[(n, rep)]
        distances = pairwise_distances(points.points)
        u_cont_nodes = interpolate(u_grid, points, scheme="bicubic")
        out = []
        for eps in grids[n]:
            eps = float(eps)
            try:
                graph = build_weight_matrix(points, eps, kernel, distances=distances)
                if not is_connected(graph):
                    out.append(SweepRecord(n, eps, rep, seed, False, math.nan, math.nan))
                    continue
                spec = eigendecompose(graph_laplacian(graph))
                sol = solve_constrained(spec, constraint, cfg.s)
                err = l2_mu_n_error(sol.values, u_cont_nodes)
                out.append(SweepRecord(n, eps, rep, seed, True, err, sol.energy))
            except Exception as exc:  # never abort the sweep on one record
                logger.warning("sweep record (n=%d, eps=%g, rep=%d) failed: %s", n, eps, rep, exc)
                out.append(SweepRecord(n, eps, rep, seed, False, math.nan, math.nan))
        return out

    tasks = [(n, rep) for n in cfg.n_values for rep in range(cfg.reps)]
    records = []
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for chunk in pool.map(job, tasks):
            records.extend(chunk)
    records.sort(key=lambda r: (r.n, r.eps, r.rep))
    return records


def smooth_curve(xs, ys, bandwidth: float | None = None) -> np.ndarray:
    """Nadaraya-Watson Gaussian smoother on a log-eps grid.

    Default bandwidth is three times the median grid spacing. Exact on
    constants since the kernel weights are normalized.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have equal length")
    if xs.shape[0] < 5:
        raise ValueError("need at least 5 points to smooth")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing")
    if bandwidth is None:
        bandwidth = 3.0 * float(np.median(np.diff(xs)))
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    z = (xs[:, None] - xs[None, :]) / bandwidth
    weights = np.exp(-0.5 * z**2)
    # guard the degenerate-bandwidth limit where off-center weights underflow
    weights[np.arange(len(xs)), np.arange(len(xs))] = np.maximum(
        weights.diagonal(), np.finfo(float).tiny
    )
    # residual form of the weighted mean, on differences: exact on constants
    diffs = ys[None, :] - ys[:, None]
    correction = (weights * diffs).sum(axis=1) / weights.sum(axis=1)
    return ys + correction


def _central_first_derivative(xs, ys):
    d1 = np.empty_like(ys)
    d1[1:-1] = (ys[2:] - ys[:-2]) / (xs[2:] - xs[:-2])
    d1[0] = (ys[1] - ys[0]) / (xs[1] - xs[0])
    d1[-1] = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
    return d1


def _central_second_derivative(xs, ys):
    d2 = np.empty_like(ys)
    left = xs[1:-1] - xs[:-2]
    right = xs[2:] - xs[1:-1]
    span = xs[2:] - xs[:-2]
    d2[1:-1] = 2.0 * (ys[:-2] / (left * span) - ys[1:-1] / (left * right) + ys[2:] / (right * span))
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    return d2


def detect_transition(xs, smoothed):
    """Locate the transition on a smoothed error curve in log-eps.

    Returns (eps_hat, eps_star, eps_argmin) in eps units: the maximizer of
    the first derivative and the minimizer of the second derivative, both
    restricted to grid points strictly above the error minimizer. The two
    boundary points carry one-sided derivatives and are excluded from every
    search.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(smoothed, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and smoothed must have equal length")
    if xs.shape[0] < 7:
        raise ValueError("need at least 7 points to detect a transition")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing")

    n = xs.shape[0]
    interior = np.arange(1, n - 1)
    argmin_idx = int(interior[np.argmin(ys[interior])])
    window = np.arange(argmin_idx + 1, n - 1)
    if window.size == 0:
        raise ValueError("no ill-posed shoulder in range: error minimizer at the right edge")

    d1 = _central_first_derivative(xs, ys)
    d2 = _central_second_derivative(xs, ys)
    hat_idx = int(window[np.argmax(d1[window])])
    star_idx = int(window[np.argmin(d2[window])])
    return (
        float(np.exp(xs[hat_idx])),
        float(np.exp(xs[star_idx])),
        float(np.exp(xs[argmin_idx])),
    )


def fit_power_law(xs, ys):
    """Least squares in log-log space: returns (c, b) for y = c * x^b."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape[0] < 2 or np.unique(xs).shape[0] < 2:
        raise ValueError("need at least two distinct x values")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs positive data")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(np.exp(intercept)), float(slope)


def loglog_fit(ns, eps_values):
    """Fit eps = c / n^a by least squares on (log n, log eps); returns (c, a)."""
    c, slope = fit_power_law(ns, eps_values)
    return c, -slope


def averaged_error_curves(cfg: SweepConfig, records) -> dict:
    """Per-n averaged error curves: n -> (eps array, mean err array).

    Reps disconnected at a given eps are excluded from that eps's average
    (with a logged count); eps values with no connected rep drop out.
    """
    curves = {}
    for n in cfg.n_values:
        rows = [r for r in records if r.n == n]
        eps_sorted = sorted({r.eps for r in rows})
        eps_out, err_out = [], []
        dropped = 0
        for eps in eps_sorted:
            errs = [r.err for r in rows if r.eps == eps and r.connected]
            dropped += sum(1 for r in rows if r.eps == eps and not r.connected)
            if errs:
                eps_out.append(eps)
                err_out.append(float(np.mean(errs)))
        if dropped:
            logger.info("n=%d: excluded %d disconnected rep-eps pairs from averages", n, dropped)
        curves[n] = (np.array(eps_out), np.array(err_out))
    return curves


def transition_study(cfg: SweepConfig, records=None):
    """Full per-n transition detection plus the scaling fits.

    Averages errors over reps, smooths in log-eps, detects the transition
    per n (detection failures exclude that n, logged), and fits eps_hat and
    eps_star against n over the largest five usable n (all of them, with a
    warning, when fewer are available).
    """
    if records is None:
        records = run_sweep(cfg)
    curves = averaged_error_curves(cfg, records)
    results = []
    for n in cfg.n_values:
        eps, err = curves[n]
        if eps.size < 7:
            logger.warning("n=%d: only %d usable eps points, skipping", n, eps.size)
            continue
        xs = np.log(eps)
        # the desk-scale dip is shallow; a bandwidth at the grid spacing
        # resolves the transition without migrating the minimum into the
        # flat complete-graph plateau (wider kernels do, breaking detection)
        bandwidth = cfg.bandwidth
        if bandwidth is None:
            bandwidth = float(np.median(np.diff(xs)))
        try:
            smoothed = smooth_curve(xs, err, bandwidth)
            eps_hat, eps_star, eps_argmin = detect_transition(xs, smoothed)
        except ValueError as exc:
            logger.warning("n=%d: transition detection failed: %s", n, exc)
            continue
        results.append(TransitionResult(n=n, eps_argmin=eps_argmin, eps_hat=eps_hat, eps_star=eps_star))

    if len(results) < 2:
        raise ValueError("fewer than 2 usable n values; cannot fit the transition scaling")
    window = sorted(results, key=lambda r: r.n)[-5:]
    if len(window) < 5:
        logger.warning("fit window has only %d n values (5 preferred)", len(window))
    ns = [r.n for r in window]
    fits = {
        "eps_hat": loglog_fit(ns, [r.eps_hat for r in window]),
        "eps_star": loglog_fit(ns, [r.eps_star for r in window]),
    }
    return results, fits


@dataclass(frozen=True)
class EigenGrowthRow:
    """Peak eigenvector sup norm within one spectral window of one instance.

    ``psi_inf_norm`` is the sup norm of the unit-Euclidean-norm eigenvector
    (values in [1/sqrt(n), 1]; a single-node spike reads as 1): the scale the
    reference slopes are stated in. ``lambda_kstar`` is the analytic
    continuum eigenvalue at rank k_star (the regression axis);
    ``lambda_n_kstar`` keeps the discrete eigenvalue for diagnostics.
    """

    n: int
    rep: int
    eps_conn: float
    regime: int
    k_star: int
    lambda_kstar: float
    psi_inf_norm: float
    lambda_n_kstar: float


@dataclass(frozen=True)
class EigenGrowthResult:
    rows: list
    fits: dict
    k_thresholds: dict = field(default_factory=dict)


def regime_thresholds(eps: float, n: int, alpha: float, d: int) -> list:
    """Window sizes alpha*eps^{-d/4}, alpha*eps^{-d/2}, alpha*eps^{-d}, n.

    Values are floored to integers and clamped into [1, n]; clamping logs a
    warning. The first three are nondecreasing whenever eps <= 1.
    """
    raw = [alpha * eps ** (-d / 4.0), alpha * eps ** (-d / 2.0), alpha * eps ** (-d), float(n)]
    out = []
    for i, value in enumerate(raw, start=1):
        k = int(math.floor(value))
        if k > n:
            logger.warning("regime %d threshold %d exceeds n=%d; clamped", i, k, n)
            k = n
        out.append(max(1, k))
    return out


def peak_rank(inf_norms: np.ndarray, window: int) -> int:
    """1-based rank of the largest sup norm among the first ``window`` ranks."""
    return int(np.argmax(inf_norms[:window])) + 1


def eigen_growth_experiment(
    n_values, alpha: float = 4.0, reps: int = 10, base_seed: int = 0, dim: int = 2
) -> EigenGrowthResult:
    """Growth study of eigenvector sup norms at the connectivity radius.

    For each instance the graph is built at exactly the MST bottleneck
    (connected under the inclusive kernel convention). Fits regress mean
    log sup norm on mean log analytic eigenvalue per regime across the
    largest seven n (all available, with a warning, when fewer).
    """
    n_values = tuple(int(n) for n in n_values)
    kernel = Kernel.indicator()
    lam_analytic = analytic_eigenvalues(max(n_values), d=dim)

    def job(task):
        n, rep = task
        seed = derive_seed(base_seed, n, rep)
        points = sample_uniform(n, dim, seed)
        distances = pairwise_distances(points.points)
        eps = mst_bottleneck(distances)
        graph = build_weight_matrix(points, eps, kernel, distances=distances)
        if not is_connected(graph):
            raise RuntimeError(f"graph disconnected at its own bottleneck (n={n}, rep={rep})")
        spec = eigendecompose(graph_laplacian(graph))
        # sup norms of unit-Euclidean eigenvectors (decomposition columns
        # carry the L2(mu_n) scale sqrt(n))
        inf_norms = np.abs(spec.eigenvectors).max(axis=0) / math.sqrt(n)
        rows = []
        for regime, window in enumerate(regime_thresholds(eps, n, alpha, dim), start=1):
            k_star = peak_rank(inf_norms, window)
            rows.append(
                EigenGrowthRow(
                    n=n,
                    rep=rep,
                    eps_conn=eps,
                    regime=regime,
                    k_star=k_star,
                    lambda_kstar=float(lam_analytic[k_star - 1]),
                    psi_inf_norm=float(inf_norms[k_star - 1]),
                    lambda_n_kstar=float(spec.eigenvalues[k_star - 1]),
                )
            )
        return rows

    tasks = [(n, rep) for n in n_values for rep in range(reps)]
    rows = []
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for chunk in pool.map(job, tasks):
            rows.extend(chunk)
    rows.sort(key=lambda r: (r.n, r.rep, r.regime))

    fit_ns = sorted(set(n_values))[-7:]
    if len(fit_ns) < 7:
        logger.warning("growth fits use %d n values (7 preferred)", len(fit_ns))
    fits = {}
    for regime in (1, 2, 3, 4):
        mean_lam, mean_psi = [], []
        for n in fit_ns:
            picked = [r for r in rows if r.n == n and r.regime == regime]
            mean_lam.append(math.exp(np.mean([math.log(r.lambda_kstar) for r in picked])))
            mean_psi.append(math.exp(np.mean([math.log(r.psi_inf_norm) for r in picked])))
        try:
            fits[regime] = fit_power_law(mean_lam, mean_psi)
        except ValueError as exc:
            # tiny runs can clamp every window to n with identical peak ranks
            logger.warning("regime %d fit degenerate: %s", regime, exc)
            fits[regime] = None
    return EigenGrowthResult(
        rows=rows,
        fits=fits,
        k_thresholds={
            n: regime_thresholds(
                float(np.mean([r.eps_conn for r in rows if r.n == n and r.regime == 1])),
                n,
                alpha,
                dim,
            )
            for n in n_values
        },
    )
