"""Value types shared by every module: residues, pose ensembles and embeddings.

All three are immutable after construction. Arrays are copied on the way in
and marked read-only, so instances are safe to share across threads.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from docking_attention.errors import ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "EmbeddingMatrix",
    "PoseEnsemble",
    "ProteinStructure",
    "format_embeddings_tsv",
    "format_exact",
    "format_float",
    "format_pose_xyz",
    "format_protein_tsv",
]


def format_float(value: float) -> str:
    """Six significant digits, always with a ``.``-style decimal separator."""
    return format(float(value), ".6g")


def format_exact(value: float) -> str:
    """Shortest text that parses back to the same double."""
    return repr(float(value))


def _frozen(values, shape_check, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if not shape_check(arr.shape):
        raise ValidationError(f"{name} has invalid shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProteinStructure:
    """Ordered residues with one reference point (Cα) each."""

    labels: tuple[str, ...]
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        positions = _frozen(
            self.positions,
            lambda s: len(s) == 2 and s[1] == 3 and s[0] >= 1,
            "residue positions",
        )
        if len(self.labels) != positions.shape[0]:
            raise ValidationError(
                f"{len(self.labels)} labels for {positions.shape[0]} positions"
            )
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        object.__setattr__(self, "positions", positions)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def indices(self) -> range:
        return range(1, self.n + 1)

    def position(self, index: int) -> np.ndarray:
        """Reference point of residue ``index`` (1-based)."""
        if not 1 <= index <= self.n:
            raise ValidationError(f"residue index {index} outside 1..{self.n}")
        return self.positions[index - 1]

    def permuted(self, order: Sequence[int]) -> "ProteinStructure":
        order = list(order)
        return ProteinStructure(
            labels=tuple(self.labels[i] for i in order),
            positions=self.positions[order],
        )


@dataclass(frozen=True)
class PoseEnsemble:
    """K poses of one ligand; every pose lists the same atoms in the same order."""

    elements: tuple[str, ...]
    coordinates: np.ndarray = field(repr=False)

    def __post_init__(self):
        coords = _frozen(
            self.coordinates,
            lambda s: len(s) == 3 and s[2] == 3 and s[0] >= 1 and s[1] >= 1,
            "pose coordinates",
        )
        if len(self.elements) != coords.shape[1]:
            raise ValidationError(
                f"{len(self.elements)} elements for {coords.shape[1]} atoms per pose"
            )
        object.__setattr__(self, "elements", tuple(str(e) for e in self.elements))
        object.__setattr__(self, "coordinates", coords)

    @property
    def k(self) -> int:
        return self.coordinates.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.coordinates.shape[1]

    def union(self, other: "PoseEnsemble") -> "PoseEnsemble":
        if self.elements != other.elements:
            raise ValidationError("pose atom mismatch")
        return PoseEnsemble(
            self.elements, np.concatenate([self.coordinates, other.coordinates])
        )


@dataclass(frozen=True)
class EmbeddingMatrix:
    """n×d per-residue embeddings, rows in residue order."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen(
            self.values,
            lambda s: len(s) == 2 and s[0] >= 1 and s[1] >= 1,
            "embedding matrix",
        )
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def check_pairs_with(self, protein: ProteinStructure) -> None:
        if self.n != protein.n:
            raise ValidationError(
                f"embedding rows ({self.n}) != residue count ({protein.n})"
            )


def format_protein_tsv(protein: ProteinStructure) -> str:
    lines = [
        "\t".join([str(i), label, *(format_float(c) for c in pos)])
        for i, label, pos in zip(protein.indices, protein.labels, protein.positions)
    ]
    return "\n".join(lines) + "\n"


def format_embeddings_tsv(matrix: EmbeddingMatrix) -> str:
    return "".join(
        "\t".join(format_float(v) for v in row) + "\n" for row in matrix.values
    )


def format_pose_xyz(poses: PoseEnsemble, comment: str = "") -> list[str]:
    """One XYZ document per pose."""
    documents = []
    for k, pose in enumerate(poses.coordinates, start=1):
        lines = [str(poses.n_atoms), comment or f"pose {k}"]
        lines += [
            " ".join([element, *(format_float(c) for c in xyz)])
            for element, xyz in zip(poses.elements, pose)
        ]
        documents.append("\n".join(lines) + "\n")
    return documents
