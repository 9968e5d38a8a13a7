from docking_attention.readers.config import PROTEIN_READERS, identify_protein_reader
from docking_attention.readers.embedding_tsv import EmbeddingTsvReader, parse_embeddings
from docking_attention.readers.pdb_ca import PdbCaReader, parse_pdb_ca
from docking_attention.readers.pose_xyz import PoseXyzReader, parse_pose_xyz
from docking_attention.readers.reader import Reader, read_text, tsv_rows
from docking_attention.readers.residue_tsv import ResidueTsvReader, parse_protein_tsv

__all__ = [
    "EmbeddingTsvReader",
    "PROTEIN_READERS",
    "PdbCaReader",
    "PoseXyzReader",
    "Reader",
    "ResidueTsvReader",
    "identify_protein_reader",
    "parse_embeddings",
    "parse_pdb_ca",
    "parse_pose_xyz",
    "parse_protein_tsv",
    "read_text",
    "tsv_rows",
]
