"""Omega-shape head-shoulder silhouette classifier."""

from .classifier import HUMAN, NON_HUMAN, REJECTED, Decision, Descriptors, analyze, calibrate, classify, evaluate
from .config import RunConfig, Thresholds, load_config
from .omega import OmegaParams, eval_forward, invert_for_s
from .segmentation import BinaryMask, load_mask

__version__ = "0.1.0"

__all__ = [
    "HUMAN", "NON_HUMAN", "REJECTED", "Decision", "Descriptors", "analyze", "calibrate",
    "classify", "evaluate", "RunConfig", "Thresholds", "load_config", "OmegaParams",
    "eval_forward", "invert_for_s", "BinaryMask", "load_mask",
]
