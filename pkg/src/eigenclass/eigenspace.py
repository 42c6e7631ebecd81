"""PCA eigenspace built through the small M x M Gram matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import GrayImage
from .errors import (
    ConvergenceFailure,
    DegenerateData,
    DimensionMismatch,
    EmptyInput,
    IndexOutOfRange,
    NotSymmetric,
)

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-12
RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Eigenspace:
    """Trained projection.

    ``components`` holds one unit-norm principal axis per row, ordered by
    non-increasing ``eigenvalues`` (eigenvalues of the unscaled W^T W).
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    m: int

    def __post_init__(self):
        for name in ("mean", "components", "eigenvalues"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.components.ndim != 2 or self.components.shape[1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"components shape {self.components.shape} incompatible with mean length {self.mean.shape[0]}"
            )
        if self.eigenvalues.shape != (self.components.shape[0],):
            raise DimensionMismatch("one eigenvalue per component required")

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        X = np.asarray(samples, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D sample matrix, got shape {X.shape}")
        return X
    rows = [np.asarray(s, dtype=np.float64) for s in samples]
    if not rows:
        raise EmptyInput("no samples")
    lengths = {r.shape for r in rows}
    if len(lengths) != 1 or rows[0].ndim != 1:
        raise DimensionMismatch(f"samples have inconsistent shapes: {sorted(lengths)}")
    return np.vstack(rows)


def compute_mean(samples) -> np.ndarray:
    """Elementwise mean of the samples (rows)."""
    X = _as_matrix(samples)
    if X.shape[0] == 0:
        raise EmptyInput("no samples")
    return X.mean(axis=0)


def center(samples, mean) -> np.ndarray:
    """Data matrix W (N x M) whose i-th column is ``samples[i] - mean``."""
    X = _as_matrix(samples)
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape != (X.shape[1],):
        raise DimensionMismatch(f"mean has length {mean.shape}, samples have {X.shape[1]} features")
    return (X - mean).T


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def symmetric_eigen(A, backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (non-increasing) and orthonormal eigenvectors (columns) of a symmetric matrix.

    Cyclic Jacobi, at most 100 sweeps, stopping once the off-diagonal
    Frobenius norm is below 1e-12 * ||A||_F.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotSymmetric("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")
    n = A.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    solver = kernels.jacobi_eigh if backend is None else kernels.BACKENDS[backend]
    tol = OFF_DIAGONAL_TOL * np.linalg.norm(A)
    values, vectors, sweeps = solver(A, MAX_SWEEPS, tol)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi did not converge within {MAX_SWEEPS} sweeps (n={n})")
    order = np.argsort(-values, kind="stable")
    return values[order], _canonical_signs(vectors[:, order])


def fit_pca(W, max_components: int | None = None, *, scale: float = 1.0,
            backend: str | None = None) -> Eigenspace:
    """Principal axes of the centered data matrix ``W`` (N x M, columns are samples).

    The M x M matrix W^T W is diagonalized and each eigenvector v with a
    non-negligible eigenvalue is mapped back to feature space as W v / ||W v||.
    ``scale`` is the magnitude of the uncentered data; centered entries below
    1e-12 * scale count as rounding noise when deciding whether the data is
    degenerate. The returned Eigenspace carries a zero mean; use
    :func:`fit_eigenspace` to fit from raw samples.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionMismatch(f"W must be 2-D, got shape {W.shape}")
    n, m = W.shape
    if m < 2:
        raise EmptyInput(f"need at least 2 samples to fit an eigenspace, got {m}")
    if max_components is not None and max_components < 1:
        raise IndexOutOfRange(f"max_components must be >= 1, got {max_components}")
    if not np.any(np.abs(W) > 1e-12 * max(1.0, scale)):
        raise DegenerateData("all samples are identical; covariance is zero")

    gram = W.T @ W
    gram = 0.5 * (gram + gram.T)
    values, vectors = symmetric_eigen(gram, backend=backend)
    values = np.where(values < 0, 0.0, values)
    lam_max = values[0]
    if lam_max <= 0:
        raise DegenerateData("covariance has no positive eigenvalue")
    keep = int(np.count_nonzero(values > RANK_TOL * lam_max))
    if max_components is not None:
        keep = min(keep, max_components)
    axes = W @ vectors[:, :keep]
    axes /= np.linalg.norm(axes, axis=0)
    axes = _canonical_signs(axes)
    return Eigenspace(np.zeros(n), axes.T, values[:keep], m)


def fit_eigenspace(samples, max_components: int | None = None, *, backend: str | None = None) -> Eigenspace:
    """Mean, centering and PCA in one step."""
    X = _as_matrix(samples)
    mean = compute_mean(X)
    W = center(X, mean)
    es = fit_pca(W, max_components, scale=float(np.abs(X).max(initial=0.0)), backend=backend)
    return Eigenspace(mean, es.components, es.eigenvalues, es.m)


def project(es: Eigenspace, x) -> np.ndarray:
    """Coordinates of ``x`` (one vector or rows of a matrix) in the eigenspace."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != es.n:
        raise DimensionMismatch(f"feature length {x.shape[-1:]} != eigenspace dimension {es.n}")
    # row by row so a vector projects bit-identically alone or inside a batch
    if x.ndim == 1:
        return es.components @ (x - es.mean)
    out = np.empty((x.shape[0], es.n_components))
    for i, row in enumerate(x):
        out[i] = es.components @ (row - es.mean)
    return out


def back_project(es: Eigenspace, coords) -> np.ndarray:
    return es.mean + np.asarray(coords, dtype=np.float64) @ es.components


def eigenface_scale(es: Eigenspace, index: int) -> float:
    """Display gain for a component.

    The face 3 standard deviations along the axis (deviation 3*sqrt(lambda)*v)
    is stretched so its largest deviation fills half the 8-bit range.
    """
    deviation = 3.0 * np.sqrt(float(es.eigenvalues[index])) * es.components[index]
    peak = np.abs(deviation).max()
    if peak == 0:
        return 0.0
    # gain applied to the unit vector; equals 127.5 / max|v|
    return 3.0 * np.sqrt(float(es.eigenvalues[index])) * 127.5 / peak


def reconstruct_eigenface(es: Eigenspace, index: int, w: int, h: int, scale: float | None = None) -> GrayImage:
    """Eigenface ``index`` reshaped to h x w with the dataset mean added, clamped to [0, 255]."""
    if not 0 <= index < es.n_components:
        raise IndexOutOfRange(f"component {index} requested, {es.n_components} retained")
    if w * h != es.n:
        raise DimensionMismatch(f"{w}x{h} image does not hold {es.n} features")
    if scale is None:
        scale = eigenface_scale(es, index)
    img = es.mean + scale * es.components[index]
    return GrayImage(np.clip(img, 0, 255).reshape(h, w))


def mean_face(es: Eigenspace, w: int, h: int) -> GrayImage:
    if w * h != es.n:
        raise DimensionMismatch(f"{w}x{h} image does not hold {es.n} features")
    return GrayImage(np.clip(es.mean, 0, 255).reshape(h, w))
