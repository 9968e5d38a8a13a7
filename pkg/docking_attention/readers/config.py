from pathlib import Path

from docking_attention.errors import ParseError
from docking_attention.readers.pdb_ca import PdbCaReader
from docking_attention.readers.reader import Reader
from docking_attention.readers.residue_tsv import ResidueTsvReader

# First match wins.
PROTEIN_READERS: list[Reader] = [
    PdbCaReader(),
    ResidueTsvReader(),
]


def identify_protein_reader(file: str | Path) -> Reader:
    if not Path(file).exists():
        raise ParseError(f"cannot read {file}: No such file or directory")
    for reader in PROTEIN_READERS:
        if reader.identify(file):
            return reader
    raise ParseError(f"no protein reader recognises {file}")
