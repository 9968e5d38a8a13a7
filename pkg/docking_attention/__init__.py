"""Docking-aware attention pooling of protein residue embeddings."""

__all__ = [
    "__version__",
    "daa_forward",
    "interaction_scores",
    "score_pipeline",
    "train_daa_classifier",
]

__version__ = "0.1.0"

from .attention import daa_forward
from .ljscore import interaction_scores, score_pipeline
from .train import train_daa_classifier
