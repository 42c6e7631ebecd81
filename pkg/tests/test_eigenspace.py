import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenclass.dataset import GrayImage
from eigenclass.eigenspace import (
    Eigenspace,
    back_project,
    center,
    compute_mean,
    fit_eigenspace,
    fit_pca,
    mean_face,
    project,
    reconstruct_eigenface,
    symmetric_eigen,
)
from eigenclass.errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyInput,
    IndexOutOfRange,
    NotSymmetric,
)
from eigenclass.features import FeatureVector

from .oracles import exact_mean


def test_compute_mean_examples():
    assert compute_mean([[1, 3], [3, 5]]).tolist() == [2, 4]
    assert compute_mean([[7, 7]]).tolist() == [7, 7]
    assert compute_mean([FeatureVector(np.array([1.0, 2.0]), "raw")]).tolist() == [1, 2]
    with pytest.raises(EmptyInput):
        compute_mean([])
    with pytest.raises(DimensionMismatch):
        compute_mean([[1, 2], [1, 2, 3]])


def test_compute_mean_exact_oracle(rng):
    X = rng.normal(scale=100, size=(100, 17))
    assert np.abs(compute_mean(X) - np.array(exact_mean(X.tolist()))).max() <= 1e-9


def test_center_examples(rng):
    W = center([[1, 3], [3, 5]], [2, 4])
    assert W[:, 0].tolist() == [-1, -1] and W[:, 1].tolist() == [1, 1]
    X = rng.normal(size=(6, 4))
    assert np.array_equal(center(X, np.zeros(4)), X.T)
    assert np.abs(center(X, compute_mean(X)).sum(axis=1)).max() <= 1e-6
    with pytest.raises(DimensionMismatch):
        center(X, np.zeros(3))


class TestSymmetricEigen:
    def test_identity(self, backend):
        vals, vecs = symmetric_eigen(np.eye(3), backend=backend)
        assert vals.tolist() == [1, 1, 1]
        assert np.allclose(vecs.T @ vecs, np.eye(3))

    def test_diagonal(self, backend):
        vals, vecs = symmetric_eigen(np.diag([2.0, 5.0, -1.0]), backend=backend)
        assert vals.tolist() == [5, 2, -1]
        assert np.array_equal(np.abs(vecs), np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))

    @pytest.mark.parametrize("n", [1, 2, 5, 8, 12])
    def test_random_residual_and_reconstruction(self, backend, rng, n):
        X = rng.normal(size=(n, n))
        A = X + X.T
        vals, V = symmetric_eigen(A, backend=backend)
        lam1 = max(1.0, abs(vals[0]))
        for i in range(n):
            assert np.linalg.norm(A @ V[:, i] - vals[i] * V[:, i]) <= 1e-7 * lam1
        assert np.abs(V.T @ V - np.eye(n)).max() <= 1e-7
        assert np.abs(V @ np.diag(vals) @ V.T - A).max() <= 1e-6
        assert np.all(np.diff(vals) <= 0)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(NotSymmetric):
            symmetric_eigen(np.ones((2, 3)))

    def test_backends_agree(self, rng):
        from eigenclass.kernels import BACKENDS

        X = rng.normal(size=(30, 30))
        A = X @ X.T
        results = [symmetric_eigen(A, backend=b) for b in BACKENDS]
        for vals, vecs in results[1:]:
            assert np.allclose(vals, results[0][0], rtol=1e-10, atol=1e-9)
            assert np.allclose(vecs, results[0][1], atol=1e-7)


def test_fit_pca_single_axis():
    X = np.array([[1.0, 5.0, 5.0], [3.0, 5.0, 5.0]])
    es = fit_eigenspace(X)
    assert es.n_components == 1
    assert es.components[0] == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)


def test_fit_pca_degenerate():
    with pytest.raises(DegenerateData):
        fit_eigenspace(np.tile([0.1, 0.2, 0.7], (5, 1)))
    with pytest.raises(DegenerateData):
        fit_eigenspace(np.tile(np.random.default_rng(0).uniform(0, 1e6, 40), (7, 1)))
    with pytest.raises(EmptyInput):
        fit_pca(np.ones((4, 1)))


def test_trick_matches_direct_eigendecomposition(backend, rng):
    W = rng.normal(size=(20, 5))
    W -= W.mean(axis=1, keepdims=True)
    es = fit_pca(W, backend=backend)
    vals, vecs = symmetric_eigen(W @ W.T, backend=backend)
    k = es.n_components
    assert k == 4  # centred columns lose one rank
    assert np.allclose(es.eigenvalues, vals[:k], rtol=1e-6)
    for j in range(k):
        c = es.components[j]
        v = vecs[:, j]
        assert min(np.abs(c - v).max(), np.abs(c + v).max()) <= 1e-6


def test_eigenspace_invariants(rng):
    X = rng.normal(size=(9, 25)) * 30 + 100
    es = fit_eigenspace(X)
    assert es.n_components <= es.m - 1
    assert np.all(np.diff(es.eigenvalues) <= 0) and es.eigenvalues.min() >= 0
    assert np.allclose(np.linalg.norm(es.components, axis=1), 1.0, atol=1e-9)
    gram = es.components @ es.components.T
    assert np.abs(gram - np.eye(es.n_components)).max() <= 1e-6
    W = center(X, compute_mean(X))
    assert es.eigenvalues.sum() == pytest.approx(np.sum(W * W), rel=1e-6)
    coords = project(es, X)
    assert np.abs(back_project(es, coords) - X).max() <= 1e-5


def test_max_components_and_duplicates(rng):
    X = rng.normal(size=(8, 12))
    assert fit_eigenspace(X, max_components=3).n_components == 3
    full = fit_eigenspace(X).n_components
    dup = fit_eigenspace(np.vstack([X, X[:3]])).n_components
    assert dup == full


def test_fit_is_bit_deterministic(rng):
    X = rng.normal(size=(15, 40))
    a, b = fit_eigenspace(X), fit_eigenspace(X)
    assert np.array_equal(a.components, b.components)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    # canonical sign: largest-magnitude entry positive
    for c in a.components:
        assert c[np.argmax(np.abs(c))] > 0


def test_project_examples(rng):
    X = rng.normal(size=(10, 6))
    es = fit_eigenspace(X)
    assert np.abs(project(es, es.mean)).max() == 0
    e0 = np.zeros(es.n_components)
    e0[0] = 1
    assert project(es, es.mean + es.components[0]) == pytest.approx(e0, abs=1e-9)
    x = rng.normal(size=6)
    expected = [sum(c[i] * (x[i] - es.mean[i]) for i in range(6)) for c in es.components]
    assert project(es, x) == pytest.approx(expected, abs=1e-9)
    # batch rows are bit-identical to single projections
    batch = project(es, X)
    assert all(np.array_equal(batch[i], project(es, X[i])) for i in range(len(X)))
    with pytest.raises(DimensionMismatch):
        project(es, np.zeros(5))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10), st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_total_variance_property(m, n, seed):
    X = np.random.default_rng(seed).normal(size=(m, n))
    es = fit_eigenspace(X)
    W = center(X, compute_mean(X))
    assert es.eigenvalues.sum() == pytest.approx(np.sum(W * W), rel=1e-6)


def _basis_space():
    mean = np.full(6, 128.0)
    comps = np.zeros((1, 6))
    comps[0, 0] = 1.0
    return Eigenspace(mean, comps, np.array([4.0]), 3)


def test_eigenface_basis_vector():
    img = reconstruct_eigenface(_basis_space(), 0, 3, 2)
    assert img.size == (3, 2)
    assert img.pixels[0, 0] == 255
    assert np.all(img.pixels.reshape(-1)[1:] == 128)


def test_eigenface_zero_scale_is_mean():
    es = _basis_space()
    assert np.array_equal(reconstruct_eigenface(es, 0, 3, 2, scale=0).pixels, np.full((2, 3), 128.0))
    assert mean_face(es, 2, 3).size == (2, 3)


def test_eigenface_errors():
    es = _basis_space()
    with pytest.raises(IndexOutOfRange):
        reconstruct_eigenface(es, 1, 3, 2)
    with pytest.raises(DimensionMismatch):
        reconstruct_eigenface(es, 0, 4, 2)


def test_eigenfaces_from_synthetic(small_synth):
    from eigenclass.features import RAW, FeatureConfig, extract_matrix

    X = extract_matrix(small_synth.train.images, FeatureConfig(RAW, 16, 16))
    es = fit_eigenspace(X)
    for i in range(6):
        img = reconstruct_eigenface(es, i, 16, 16)
        assert isinstance(img, GrayImage) and img.size == (16, 16)
        assert img.pixels.min() >= 0 and img.pixels.max() <= 255
