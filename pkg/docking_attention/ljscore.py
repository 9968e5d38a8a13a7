"""Per-residue Lennard-Jones interaction scores averaged over a pose ensemble,
the score transform, and adaptive smoothing."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from docking_attention.errors import (
    CoincidentPointsError,
    ParseError,
    ValidationError,
)
from docking_attention.structures import PoseEnsemble, ProteinStructure, format_float

logger = logging.getLogger(__name__)

__all__ = [
    "InteractionProfile",
    "LjParams",
    "Transform",
    "apply_transform",
    "format_profile",
    "interaction_scores",
    "lj_pair",
    "parse_profile",
    "score_pipeline",
    "smooth_scores",
    "smoothing_grad_beta",
]

# Upper bound on pair energies held in memory per residue chunk.
_PAIRS_PER_CHUNK = 1 << 20

STAGES = ("raw", "transformed", "smoothed")


class Transform(str, Enum):
    RAW = "raw"
    NEGATE = "negate"
    ABS = "abs"


@dataclass(frozen=True)
class LjParams:
    epsilon: float
    sigma: float
    r_min_clamp: float
    transform: Transform = Transform.ABS

    def __post_init__(self):
        for name in ("epsilon", "sigma", "r_min_clamp"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0, got {value}")
        try:
            object.__setattr__(self, "transform", Transform(self.transform))
        except ValueError:
            raise ValidationError(f"unknown transform {self.transform!r}") from None


@dataclass(frozen=True)
class InteractionProfile:
    raw: np.ndarray = field(repr=False)
    transformed: np.ndarray = field(repr=False)
    smoothed: np.ndarray = field(repr=False)
    beta_used: float

    def __post_init__(self):
        n = len(self.raw)
        for stage in STAGES:
            values = np.array(getattr(self, stage), dtype=np.float64)
            if values.shape != (n,):
                raise ValidationError(f"stage {stage} has shape {values.shape}, expected ({n},)")
            if not np.all(np.isfinite(values)):
                raise ValidationError(f"stage {stage} contains non-finite scores")
            values.setflags(write=False)
            object.__setattr__(self, stage, values)
        if not 0.0 <= self.beta_used <= 1.0:
            raise ValidationError(f"beta must lie in [0, 1], got {self.beta_used}")


def _lj_energy(r: np.ndarray, params: LjParams) -> np.ndarray:
    sr6 = (params.sigma / np.maximum(r, params.r_min_clamp)) ** 6
    return 4.0 * params.epsilon * (sr6 * sr6 - sr6)


def lj_pair(r: float, params: LjParams) -> float:
    """``4ε[(σ/r')¹² − (σ/r')⁶]`` with ``r' = max(r, r_min_clamp)``.

    Non-positive ``r`` means coincident points and is rejected before clamping.
    """
    if not r > 0:
        raise ValidationError(f"distance must be > 0, got {r}")
    sr6 = (params.sigma / max(r, params.r_min_clamp)) ** 6
    return 4.0 * params.epsilon * (sr6 * sr6 - sr6)


def interaction_scores(
    protein: ProteinStructure,
    poses: PoseEnsemble,
    params: LjParams,
    threads: int = 1,
) -> np.ndarray:
    """Ensemble-averaged LJ score per residue.

    ``S_i = (1/K) Σ_k Σ_j lj(‖p_i − m_j^k‖)``. The K·n_m pair energies of a residue
    are summed with ``math.fsum``; the exactly rounded sum does not depend on atom
    order, chunking or thread count.
    """
    positions = protein.positions
    ligand = poses.coordinates
    k = poses.k
    pairs = k * poses.n_atoms

    def score_rows(start: int, stop: int) -> np.ndarray:
        diff = positions[start:stop, None, None, :] - ligand[None]
        r = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2)
        if np.any(r == 0):
            i, pose, atom = np.argwhere(r == 0)[0]
            raise CoincidentPointsError(start + i + 1, pose + 1, atom + 1)
        energies = _lj_energy(r, params).reshape(stop - start, pairs)
        return np.array([math.fsum(row) for row in energies]) / k

    rows_per_chunk = max(1, _PAIRS_PER_CHUNK // pairs)
    bounds = [
        (start, min(start + rows_per_chunk, protein.n))
        for start in range(0, protein.n, rows_per_chunk)
    ]
    if threads > 1 and len(bounds) < threads:
        step = math.ceil(protein.n / threads)
        bounds = [(s, min(s + step, protein.n)) for s in range(0, protein.n, step)]

    logger.debug(
        "scoring %d residues against %d poses x %d atoms in %d chunk(s)",
        protein.n, k, poses.n_atoms, len(bounds),
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: score_rows(*b), bounds))
    else:
        parts = [score_rows(*b) for b in bounds]
    return np.concatenate(parts)


def apply_transform(raw, mode: Transform | str) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)
    mode = Transform(mode)
    if mode is Transform.NEGATE:
        return -raw
    if mode is Transform.ABS:
        return np.abs(raw)
    return raw.copy()


def _check_beta(beta: float) -> None:
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must lie in [0, 1], got {beta}")


def _row_means(v: np.ndarray) -> np.ndarray:
    rows = v.reshape(-1, v.shape[-1])
    means = np.array([math.fsum(row) for row in rows]) / v.shape[-1]
    return means.reshape(v.shape[:-1] + (1,))


def smooth_scores(transformed, beta: float) -> np.ndarray:
    """``Ŝ_i = β v_i + (1 − β) mean(v)``; the mean is preserved.

    Leading axes are independent score vectors (one per sample).
    """
    _check_beta(beta)
    v = np.asarray(transformed, dtype=np.float64)
    if v.ndim == 0 or v.shape[-1] == 0:
        raise ValidationError("smoothing needs a non-empty score vector")
    return beta * v + (1.0 - beta) * _row_means(v)


def smoothing_grad_beta(transformed, d_smoothed) -> float:
    """d(loss)/dβ given d(loss)/dŜ: ``Σ_i g_i (v_i − mean(v))``, summed over samples."""
    v = np.asarray(transformed, dtype=np.float64)
    g = np.asarray(d_smoothed, dtype=np.float64)
    if g.shape != v.shape:
        raise ValidationError(f"dimension mismatch: gradient {g.shape} vs scores {v.shape}")
    return float(np.sum(g * (v - _row_means(v))))


def score_pipeline(
    protein: ProteinStructure,
    poses: PoseEnsemble,
    params: LjParams,
    beta: float,
    threads: int = 1,
) -> InteractionProfile:
    _check_beta(beta)
    raw = interaction_scores(protein, poses, params, threads=threads)
    transformed = apply_transform(raw, params.transform)
    smoothed = smooth_scores(transformed, beta)
    return InteractionProfile(raw=raw, transformed=transformed, smoothed=smoothed, beta_used=beta)


def format_profile(profile: InteractionProfile, params: LjParams | None = None) -> str:
    lines = [f"# beta {format_float(profile.beta_used)}"]
    if params is not None:
        lines += [
            f"# epsilon {format_float(params.epsilon)}",
            f"# sigma {format_float(params.sigma)}",
            f"# r_min_clamp {format_float(params.r_min_clamp)}",
            f"# transform {params.transform.value}",
        ]
    for stage in STAGES:
        lines.append(f"# stage: {stage}")
        lines += [format_float(v) for v in getattr(profile, stage)]
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> InteractionProfile:
    stages: dict[str, list[float]] = {}
    beta = None
    current = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("# stage:"):
            current = line.split(":", 1)[1].strip()
            if current not in STAGES:
                raise ParseError(f"unknown stage {current!r}", line_no)
            stages[current] = []
        elif line.startswith("# beta "):
            try:
                beta = float(line.split()[2])
            except ValueError:
                raise ParseError("unparseable beta header", line_no) from None
        elif line.startswith("#"):
            continue
        elif current is None:
            raise ParseError("score before any stage header", line_no)
        else:
            try:
                stages[current].append(float(line))
            except ValueError:
                raise ParseError("unparseable score", line_no) from None

    missing = [s for s in STAGES if s not in stages]
    if missing or beta is None:
        raise ParseError(f"profile is missing {', '.join(missing) or 'beta header'}")
    return InteractionProfile(beta_used=beta, **stages)
