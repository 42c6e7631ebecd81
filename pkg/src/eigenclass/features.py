"""Raw-pixel and zigzag-DCT feature extraction."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataset import GrayImage
from .errors import CoefficientCountOutOfRange, DimensionMismatch, EmptyImage, InvalidSpec

RAW = "raw"
DCT = "dct"


@dataclass(frozen=True)
class FeatureConfig:
    kind: str
    image_w: int
    image_h: int
    n_coeffs: int | None = None

    def __post_init__(self):
        if self.kind not in (RAW, DCT):
            raise InvalidSpec(f"feature kind must be 'raw' or 'dct', got {self.kind!r}")
        if self.image_w < 1 or self.image_h < 1:
            raise InvalidSpec(f"bad image size {self.image_w}x{self.image_h}")
        if self.kind == DCT:
            if self.n_coeffs is None or not 1 <= self.n_coeffs <= self.image_w * self.image_h:
                raise CoefficientCountOutOfRange(
                    f"n_coeffs must lie in [1, {self.image_w * self.image_h}], got {self.n_coeffs}"
                )
        elif self.n_coeffs is not None:
            raise InvalidSpec("n_coeffs only applies to DCT features")

    @property
    def dim(self) -> int:
        return self.n_coeffs if self.kind == DCT else self.image_w * self.image_h

    def describe(self) -> str:
        return f"dct:{self.n_coeffs}" if self.kind == DCT else "raw"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    kind: str
    n_coeffs: int | None = None

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)


def _check_image(img: GrayImage):
    if img.pixels.size == 0:
        raise EmptyImage("image has no pixels")


def raw_pixel_vector(img: GrayImage) -> FeatureVector:
    _check_image(img)
    return FeatureVector(img.pixels.reshape(-1).copy(), RAW)


@lru_cache(maxsize=32)
def _cosine_basis(n: int) -> np.ndarray:
    # basis[k, i] = cos(pi / n * (i + 1/2) * k)
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    basis = np.cos(np.pi / n * (i + 0.5) * k)
    basis.setflags(write=False)
    return basis


def dct2(img: GrayImage | np.ndarray) -> np.ndarray:
    """Unnormalized 2-D DCT-II of the whole image.

    ``X[k1, k2] = sum_i sum_j x[i, j] cos(pi/N2 (j+1/2) k2) cos(pi/N1 (i+1/2) k1)``,
    evaluated separably. No orthonormal scale factors are applied.
    """
    x = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise EmptyImage("dct2 needs a non-empty 2-D image")
    n1, n2 = x.shape
    return _cosine_basis(n1) @ x @ _cosine_basis(n2).T


@lru_cache(maxsize=32)
def _zigzag_cached(n_rows: int, n_cols: int) -> tuple[tuple[int, int], ...]:
    order = []
    for s in range(n_rows + n_cols - 1):
        lo, hi = max(0, s - n_cols + 1), min(s, n_rows - 1)
        rows = range(hi, lo - 1, -1) if s % 2 == 0 else range(lo, hi + 1)
        order.extend((r, s - r) for r in rows)
    return tuple(order)


def zigzag_order(n_rows: int, n_cols: int) -> list[tuple[int, int]]:
    """JPEG-style zigzag over anti-diagonals.

    Even-sum diagonals run bottom-left to top-right, odd-sum ones top-right to
    bottom-left, so the scan starts (0,0), (0,1), (1,0), (2,0), ...
    """
    if n_rows < 1 or n_cols < 1:
        raise InvalidSpec(f"zigzag dimensions must be positive, got {n_rows}x{n_cols}")
    return list(_zigzag_cached(n_rows, n_cols))


@lru_cache(maxsize=32)
def zigzag_flat_indices(n_rows: int, n_cols: int) -> np.ndarray:
    rc = np.array(_zigzag_cached(n_rows, n_cols), dtype=np.intp)
    flat = rc[:, 0] * n_cols + rc[:, 1]
    flat.setflags(write=False)
    return flat


def zigzag_dct(img: GrayImage) -> np.ndarray:
    """All DCT coefficients of ``img`` in zigzag order."""
    coeffs = dct2(img)
    return coeffs.reshape(-1)[zigzag_flat_indices(*coeffs.shape)]


def dct_features(img: GrayImage, n_coeffs: int) -> FeatureVector:
    _check_image(img)
    total = img.width * img.height
    if not 1 <= n_coeffs <= total:
        raise CoefficientCountOutOfRange(f"n_coeffs must lie in [1, {total}], got {n_coeffs}")
    return FeatureVector(zigzag_dct(img)[:n_coeffs].copy(), DCT, n_coeffs)


def extract(img: GrayImage, config: FeatureConfig) -> np.ndarray:
    """Feature vector of ``img`` under ``config`` as a plain array."""
    if (img.width, img.height) != (config.image_w, config.image_h):
        raise DimensionMismatch(
            f"image is {img.width}x{img.height}, model expects {config.image_w}x{config.image_h}"
        )
    if config.kind == RAW:
        return raw_pixel_vector(img).values
    return dct_features(img, config.n_coeffs).values


def extract_matrix(images, config: FeatureConfig) -> np.ndarray:
    """Stack features of ``images`` as rows (M x N)."""
    rows = [extract(img, config) for img in images]
    if not rows:
        return np.empty((0, config.dim))
    return np.vstack(rows)
