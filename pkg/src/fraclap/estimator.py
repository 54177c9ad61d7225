"""Scikit-learn style front end for the graph solver.

The estimator is transductive: ``fit`` takes the full point cloud with a
partially observed target (NaN marks unlabeled nodes) and solves for values
at every node. ``predict`` returns the transduction, or looks values up at
the torus-nearest fitted node for new query points.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .graph import Kernel, build_weight_matrix, connectivity_radius, graph_laplacian
from .solver import ConstraintSet, classify, solve_constrained
from .spectral import eigendecompose
from .torus import SampleSet, wrap
from .tlp import nearest_transport_map


def check_points(X, dim: int | None = None) -> np.ndarray:
    """Validate a 2-d finite point array and wrap it onto the torus."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a nonempty 2-d array of points")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"X has dimension {X.shape[1]}, expected {dim}")
    return wrap(X)


def check_partial_labels(y, n: int) -> tuple:
    """Split a partially observed target into labeled indices and values."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != n:
        raise ValueError(f"y has length {y.shape[0]}, expected {n}")
    labeled = np.nonzero(~np.isnan(y))[0]
    if labeled.size < 1:
        raise ValueError("y must contain at least one labeled (non-NaN) entry")
    if not np.all(np.isfinite(y[labeled])):
        raise ValueError("labeled entries must be finite")
    return labeled, y[labeled]


class FractionalLaplacianSSL(BaseEstimator):
    """Transductive semi-supervised regressor on torus point clouds.

    Builds the eps-neighborhood graph on the fitted points, minimizes the
    fractional Dirichlet energy of order ``s`` subject to the observed
    labels, and exposes the exact minimizer.

    Parameters
    ----------
    s : float
        Regularization exponent of the fractional energy.
    eps : float or None
        Graph length scale. None picks ``eps_factor`` times the connectivity
        radius of the fitted cloud.
    eps_factor : float
        Multiplier applied to the connectivity radius when eps is None.
    kernel : str or Kernel
        "indicator" or a Kernel instance.
    threshold : float
        Decision threshold used by predict_classes.
    """

    def __init__(self, s=16.0, eps=None, eps_factor=1.5, kernel="indicator", threshold=0.5):
        self.s = s
        self.eps = eps
        self.eps_factor = eps_factor
        self.kernel = kernel
        self.threshold = threshold

    def _resolve_kernel(self) -> Kernel:
        if isinstance(self.kernel, Kernel):
            return self.kernel
        if self.kernel == "indicator":
            return Kernel.indicator()
        raise ValueError(f"unknown kernel: {self.kernel!r}")

    def fit(self, X, y):
        """Fit on points X (n, d) and target y with NaN for unlabeled nodes."""
        X = check_points(X)
        labeled, values = check_partial_labels(y, X.shape[0])
        samples = SampleSet(points=X, dim=X.shape[1])
        kernel = self._resolve_kernel()
        eps = self.eps
        if eps is None:
            eps = self.eps_factor * connectivity_radius(samples)
        graph = build_weight_matrix(samples, eps, kernel)
        spec = eigendecompose(graph_laplacian(graph))
        solution = solve_constrained(
            spec, ConstraintSet(indices=labeled, values=values), self.s
        )
        self.samples_ = samples
        self.eps_ = float(eps)
        self.graph_ = graph
        self.decomposition_ = spec
        self.transduction_ = solution.values
        self.energy_ = solution.energy
        return self

    def _check_fitted(self):
        if not hasattr(self, "transduction_"):
            raise AttributeError("estimator is not fitted; call fit first")

    def predict(self, X=None) -> np.ndarray:
        """Values at the fitted nodes, or at the nearest fitted node for new X."""
        self._check_fitted()
        if X is None:
            return self.transduction_.copy()
        X = check_points(X, dim=self.samples_.dim)
        indices, _ = nearest_transport_map(
            SampleSet(points=X, dim=self.samples_.dim), self.samples_
        )
        return self.transduction_[indices]

    def predict_classes(self, X=None) -> np.ndarray:
        """Binary labels from the transduction via the decision threshold."""
        return classify(self.predict(X), threshold=self.threshold)
