"""Defaults for every tunable. The CLI reads its option defaults from here."""

from dataclasses import dataclass

from docking_attention.analysis import ALPHA
from docking_attention.ljscore import LjParams, Transform
from docking_attention.train import TrainConfig

__all__ = [
    "ALPHA",
    "DEFAULT_BETA",
    "DEFAULT_DIMS",
    "DEFAULT_GAMMA",
    "DEFAULT_K_LIST",
    "DEFAULT_LJ",
    "DEFAULT_TOY",
    "DEFAULT_TRAIN",
    "HeadDims",
    "ToySizes",
]


@dataclass(frozen=True)
class HeadDims:
    d_h: int
    d_v: int


@dataclass(frozen=True)
class ToySizes:
    n_samples: int
    n: int
    d: int


# Reduced-unit well depth; sigma in Ångström.
DEFAULT_LJ = LjParams(epsilon=1.0, sigma=3.4, r_min_clamp=0.5, transform=Transform.ABS)
DEFAULT_BETA = 0.5
DEFAULT_GAMMA = 1.0
DEFAULT_DIMS = HeadDims(d_h=8, d_v=8)

DEFAULT_TOY = ToySizes(n_samples=200, n=8, d=8)
DEFAULT_TRAIN = TrainConfig(learning_rate=0.05, steps=500, seed=0, l2=0.0, d_h=4, d_v=4)

DEFAULT_K_LIST = (1, 3, 5)
