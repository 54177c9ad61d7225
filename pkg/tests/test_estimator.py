import numpy as np
import pytest
from sklearn.base import clone

from fraclap import (
    ConstraintSet,
    FractionalLaplacianSSL,
    Kernel,
    build_weight_matrix,
    eigendecompose,
    graph_laplacian,
    sample_uniform,
    solve_constrained,
)


@pytest.fixture
def cloud():
    X = sample_uniform(60, 2, seed=12).points
    y = np.full(60, np.nan)
    y[0], y[1] = 0.0, 1.0
    return X, y


class TestEstimator:
    def test_fit_matches_direct_solve(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=4.0, eps=0.35).fit(X, y)
        graph = build_weight_matrix(est.samples_, 0.35, Kernel.indicator())
        spec = eigendecompose(graph_laplacian(graph))
        direct = solve_constrained(spec, ConstraintSet([0, 1], [0.0, 1.0]), 4.0)
        assert np.allclose(est.transduction_, direct.values, atol=1e-10)
        assert est.energy_ == pytest.approx(direct.energy, rel=1e-9, abs=1e-300)

    def test_predict_default_is_transduction(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=4.0, eps=0.35).fit(X, y)
        assert np.array_equal(est.predict(), est.transduction_)

    def test_predict_new_points_nearest_node(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=4.0, eps=0.35).fit(X, y)
        queries = X[:3] + 1e-6
        assert np.allclose(est.predict(queries), est.transduction_[:3])

    def test_constraints_reproduced(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=16.0, eps=0.4).fit(X, y)
        assert est.predict()[0] == pytest.approx(0.0, abs=1e-7)
        assert est.predict()[1] == pytest.approx(1.0, abs=1e-7)

    def test_eps_defaults_to_connectivity_multiple(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=4.0).fit(X, y)
        from fraclap import SampleSet, connectivity_radius

        expected = 1.5 * connectivity_radius(SampleSet(points=X, dim=2))
        assert est.eps_ == pytest.approx(expected)

    def test_predict_classes_threshold(self, cloud):
        X, y = cloud
        est = FractionalLaplacianSSL(s=4.0, eps=0.35).fit(X, y)
        classes = est.predict_classes()
        values = est.predict()
        assert np.array_equal(classes, (values >= 0.5).astype(int))

    def test_sklearn_params_and_clone(self):
        est = FractionalLaplacianSSL(s=8.0, eps=0.3, threshold=0.4)
        params = est.get_params()
        assert params["s"] == 8.0 and params["eps"] == 0.3
        twin = clone(est)
        assert twin.get_params() == params

    def test_requires_labeled_entry(self, cloud):
        X, _ = cloud
        with pytest.raises(ValueError, match="labeled"):
            FractionalLaplacianSSL(eps=0.35).fit(X, np.full(60, np.nan))

    def test_rejects_non_finite_points(self):
        X = np.array([[0.1, 0.2], [np.inf, 0.3]])
        with pytest.raises(ValueError, match="finite"):
            FractionalLaplacianSSL(eps=0.3).fit(X, [0.0, np.nan])

    def test_unfitted_predict_raises(self):
        with pytest.raises(AttributeError, match="not fitted"):
            FractionalLaplacianSSL().predict()

    def test_unknown_kernel_rejected(self, cloud):
        X, y = cloud
        with pytest.raises(ValueError, match="kernel"):
            FractionalLaplacianSSL(eps=0.35, kernel="gaussian").fit(X, y)
