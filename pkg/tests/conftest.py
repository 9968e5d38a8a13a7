import numpy as np
import pytest

from docking_attention.structures import (
    EmbeddingMatrix,
    PoseEnsemble,
    ProteinStructure,
    format_embeddings_tsv,
    format_pose_xyz,
    format_protein_tsv,
)
from docking_attention.synth import SplitMix64, synth_embeddings


def pdb_atom(serial, name, resname, resseq, xyz, record="ATOM", chain="A"):
    """One fixed-column PDB coordinate record."""
    x, y, z = xyz
    return (
        f"{record:<6}{serial:>5} {name:<4} {resname:>3} {chain}{resseq:>4}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00"
    )


@pytest.fixture
def protein():
    return ProteinStructure(
        labels=("ALA", "GLY", "SER", "LYS"),
        positions=[[0.0, 0.0, 0.0], [3.8, 0.0, 0.0], [3.8, 3.8, 0.0], [0.0, 3.8, 1.5]],
    )


@pytest.fixture
def poses(protein):
    offsets = SplitMix64(11).normal((3, 5, 3))
    center = protein.positions.mean(axis=0) + np.array([0.0, 0.0, 4.0])
    return PoseEnsemble(elements=("C", "C", "N", "O", "C"), coordinates=center + offsets)


@pytest.fixture
def embeddings(protein):
    return synth_embeddings(protein.n, 6, seed=5)


@pytest.fixture
def workspace(tmp_path, protein, poses, embeddings):
    """Input files for the CLI: protein.tsv, pose_1.xyz.., embeddings.tsv."""
    (tmp_path / "protein.tsv").write_text(format_protein_tsv(protein))
    pose_paths = []
    for k, doc in enumerate(format_pose_xyz(poses), start=1):
        path = tmp_path / f"pose_{k}.xyz"
        path.write_text(doc)
        pose_paths.append(str(path))
    (tmp_path / "embeddings.tsv").write_text(format_embeddings_tsv(embeddings))
    return {
        "dir": tmp_path,
        "protein": str(tmp_path / "protein.tsv"),
        "poses": pose_paths,
        "embeddings": str(tmp_path / "embeddings.tsv"),
    }


def random_matrix(seed, shape):
    return SplitMix64(seed).normal(shape)


def embedding_matrix(seed, n, d):
    return EmbeddingMatrix(random_matrix(seed, (n, d)))
