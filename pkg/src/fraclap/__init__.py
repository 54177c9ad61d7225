"""Semi-supervised regression on random geometric torus graphs.

Fractional Laplacian regularization with an exact Lagrange-multiplier solve,
a periodic-grid continuum reference solver, TL2 distances between empirical
function pairs, and drivers reproducing the well-posed/ill-posed transition
and eigenfunction growth studies at desk scale.
"""

from .torus import SampleSet, load_points, pairwise_distances, sample_uniform, torus_distance, wrap
from .graph import (
    Kernel,
    WeightedGraph,
    build_weight_matrix,
    connectivity_radius,
    graph_laplacian,
    is_connected,
    sigma_eta,
)
from .spectral import (
    SpectralDecomposition,
    apply_fractional,
    eigendecompose,
    fractional_energy,
    inner_product,
)
from .solver import ConstraintSet, LabelFunction, brute_force_oracle, classify, solve_constrained
from .continuum import (
    ContinuumSpectrum,
    PeriodicGrid,
    analytic_eigenvalues,
    continuum_energy,
    continuum_spectrum,
    fractional_green,
    interpolate,
    l2_mu_n_error,
    solve_continuum_constrained,
)
from .tlp import EmpiricalPair, nearest_transport_map, tl2_distance
from .estimator import FractionalLaplacianSSL

__version__ = "0.1.0"

__all__ = [
    "SampleSet",
    "load_points",
    "pairwise_distances",
    "sample_uniform",
    "torus_distance",
    "wrap",
    "Kernel",
    "WeightedGraph",
    "build_weight_matrix",
    "connectivity_radius",
    "graph_laplacian",
    "is_connected",
    "sigma_eta",
    "SpectralDecomposition",
    "apply_fractional",
    "eigendecompose",
    "fractional_energy",
    "inner_product",
    "ConstraintSet",
    "LabelFunction",
    "brute_force_oracle",
    "classify",
    "solve_constrained",
    "ContinuumSpectrum",
    "PeriodicGrid",
    "analytic_eigenvalues",
    "continuum_energy",
    "continuum_spectrum",
    "fractional_green",
    "interpolate",
    "l2_mu_n_error",
    "solve_continuum_constrained",
    "EmpiricalPair",
    "nearest_transport_map",
    "tl2_distance",
    "FractionalLaplacianSSL",
    "__version__",
]
