"""Seeded synthetic inputs.

Every random draw in the package goes through :class:`SplitMix64`, so a seed
fully determines embeddings, poses, parameter initialisation and toy tasks.

The scheme is fixed so other implementations can reproduce it bit for bit:

* word ``i`` (1-based) of a stream seeded with ``s`` is
  ``mix(s + i * 0x9E3779B97F4A7C15 mod 2**64)`` where ``mix`` is the
  SplitMix64 finaliser (xor-shift 30, multiply 0xBF58476D1CE4E5B9, xor-shift
  27, multiply 0x94D049BB133111EB, xor-shift 31);
* a uniform is ``((word >> 11) + 1) * 2**-53``, which lies in ``(0, 1]``;
* normals use Box–Muller on consecutive uniform pairs ``(u1, u2)``, emitting
  ``sqrt(-2 ln u1) cos(2 pi u2)`` then ``sqrt(-2 ln u1) sin(2 pi u2)``; a
  request for an odd count discards the final sine.

Draws are consumed in request order, row-major.
"""

import logging
import math

import numpy as np

from docking_attention.errors import ValidationError
from docking_attention.structures import EmbeddingMatrix, PoseEnsemble, ProteinStructure

logger = logging.getLogger(__name__)

__all__ = ["SplitMix64", "synth_embeddings", "synth_pose_ensemble"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._drawn = 0

    def words(self, count: int) -> np.ndarray:
        counters = np.arange(self._drawn + 1, self._drawn + count + 1, dtype=np.uint64)
        self._drawn += count
        z = np.uint64(self.seed) + counters * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def uniform(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        top = (self.words(count) >> np.uint64(11)).astype(np.float64)
        return ((top + 1.0) * 2.0**-53).reshape(shape)

    def normal(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = 2.0 * math.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count].reshape(shape)

    def symmetric(self, shape, limit: float) -> np.ndarray:
        """Uniform on ``[-limit, limit]``."""
        return limit * (2.0 * self.uniform(shape) - 1.0)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.uniform(n), kind="stable")


def synth_embeddings(n: int, d: int, seed: int) -> EmbeddingMatrix:
    """n×d standard-normal embeddings from ``SplitMix64(seed)``."""
    if n < 1 or d < 1:
        raise ValidationError(f"embedding dimensions must be positive, got {n}x{d}")
    return EmbeddingMatrix(SplitMix64(seed).normal((n, d)))


def synth_pose_ensemble(
    protein: ProteinStructure,
    anchor_residue: int,
    n_m: int,
    k: int,
    spread: float,
    seed: int,
    element: str = "C",
) -> PoseEnsemble:
    """K poses of ``n_m`` atoms scattered around one residue.

    Each coordinate is ``anchor + spread * N(0, 1)``, drawn pose by pose, atom by
    atom, x/y/z.
    """
    anchor = protein.position(anchor_residue)
    if not spread > 0:
        raise ValidationError(f"spread must be > 0, got {spread}")
    if n_m < 1 or k < 1:
        raise ValidationError(f"need n_m >= 1 and K >= 1, got n_m={n_m}, K={k}")
    offsets = SplitMix64(seed).normal((k, n_m, 3))
    logger.debug("synthesised %d poses of %d atoms around residue %d", k, n_m, anchor_residue)
    return PoseEnsemble(elements=(element,) * n_m, coordinates=anchor + spread * offsets)
