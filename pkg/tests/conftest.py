import numpy as np
import pytest

from fraclap import (
    Kernel,
    build_weight_matrix,
    connectivity_radius,
    eigendecompose,
    graph_laplacian,
    sample_uniform,
)


def random_connected_instance(seed, n_low=8, n_high=60, d=2, eps_factor=1.3):
    """A random geometric graph guaranteed connected (eps above the MST bottleneck)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_low, n_high + 1))
    points = sample_uniform(n, d, seed=seed)
    eps = eps_factor * connectivity_radius(points)
    graph = build_weight_matrix(points, eps, Kernel.indicator())
    return points, graph


@pytest.fixture
def connected_instance():
    return random_connected_instance


@pytest.fixture
def decomposed_instance():
    def make(seed, **kwargs):
        points, graph = random_connected_instance(seed, **kwargs)
        lap = graph_laplacian(graph)
        return points, graph, lap, eigendecompose(lap)

    return make
