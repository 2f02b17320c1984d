import numpy as np
import pytest

from ultratac_sim.pca import pca_fit, pca_inverse, pca_transform


class TestPCAFit:
    def test_axis_aligned_data_ratios(self):
        rng = np.random.default_rng(0)
        X = np.zeros((100, 2))
        X[:, 0] = rng.normal(0, 2.0, 100)
        proj = pca_fit(X, k=2)
        assert proj.explained_variance_ratios == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_isotropic_gaussian_even_split(self):
        rng = np.random.default_rng(123)
        X = rng.normal(size=(10000, 2))
        proj = pca_fit(X, k=2)
        assert proj.explained_variance_ratios[0] == pytest.approx(0.5, abs=0.02)
        assert proj.explained_variance_ratios[1] == pytest.approx(0.5, abs=0.02)

    def test_ratios_descending_and_bounded(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(50, 6)) * np.array([5, 3, 2, 1, 0.5, 0.1])
        proj = pca_fit(X, k=4)
        r = proj.explained_variance_ratios
        assert np.all(np.diff(r) <= 1e-12)
        assert r.sum() <= 1.0 + 1e-9
        assert np.all(r >= 0)

    def test_components_orthonormal(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(60, 5)) @ rng.normal(size=(5, 5))
        proj = pca_fit(X, k=3)
        gram = proj.components @ proj.components.T
        assert np.allclose(gram, np.eye(3), atol=1e-9)

    def test_rank_k_data_reconstructed(self):
        rng = np.random.default_rng(4)
        basis = np.linalg.qr(rng.normal(size=(5, 2)))[0].T
        X = rng.normal(size=(40, 2)) @ basis + 3.0
        proj = pca_fit(X, k=2)
        back = pca_inverse(proj, pca_transform(proj, X))
        assert np.allclose(back, X, atol=1e-6)

    def test_row_order_permutation_invariant_ratios(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(80, 4)) * np.array([3, 2, 1, 0.5])
        r1 = pca_fit(X, k=3).explained_variance_ratios
        perm = rng.permutation(80)
        r2 = pca_fit(X[perm], k=3).explained_variance_ratios
        assert np.allclose(r1, r2, atol=1e-12)

    def test_zero_variance_degenerate(self):
        X = np.ones((10, 3))
        proj = pca_fit(X, k=2)
        assert proj.degenerate
        assert np.array_equal(proj.explained_variance_ratios, np.zeros(2))
        assert proj.components.shape == (2, 3)

    def test_validation(self):
        with pytest.raises(ValueError):
            pca_fit(np.zeros((1, 3)), k=1)
        with pytest.raises(ValueError):
            pca_fit(np.zeros((5, 3)), k=4)
        with pytest.raises(ValueError):
            pca_fit(np.zeros((5, 3)), k=0)


class TestTransform:
    def test_transform_shape_and_centering(self):
        rng = np.random.default_rng(11)
        X = rng.normal(5.0, 1.0, size=(30, 4))
        proj = pca_fit(X, k=2)
        Y = pca_transform(proj, X)
        assert Y.shape == (30, 2)
        assert np.allclose(Y.mean(axis=0), 0.0, atol=1e-9)
