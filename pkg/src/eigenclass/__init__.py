"""Gender and age-group recognition from face images.

Raw-pixel or zigzag-DCT features, an eigenspace fitted through the small
Gram matrix, and k-NN / nearest-centroid classification.
"""
from .classifier import ClassifierRule, TrainedModel, classify, train_model
from .dataset import GrayImage, LabeledDataset, SyntheticSpec, generate_synthetic, load_image, load_manifest
from .eigenspace import Eigenspace, fit_eigenspace, project
from .evaluation import evaluate, sweep_dct, sweep_raw
from .features import FeatureConfig, dct2, dct_features, raw_pixel_vector, zigzag_order
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassifierRule",
    "Eigenspace",
    "FeatureConfig",
    "GrayImage",
    "LabeledDataset",
    "SyntheticSpec",
    "TrainedModel",
    "classify",
    "dct2",
    "dct_features",
    "evaluate",
    "fit_eigenspace",
    "generate_synthetic",
    "load_image",
    "load_manifest",
    "project",
    "raw_pixel_vector",
    "sweep_dct",
    "sweep_raw",
    "train_model",
    "zigzag_order",
]
