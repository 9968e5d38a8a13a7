import logging

from docking_attention.errors import ParseError
from docking_attention.readers.reader import Reader
from docking_attention.structures import ProteinStructure

logger = logging.getLogger(__name__)

# Fixed PDB columns, 0-based slices.
_RECORD = slice(0, 6)
_ATOM_NAME = slice(12, 16)
_RES_NAME = slice(17, 20)
_RESIDUE_KEY = slice(21, 27)  # chain, resSeq, insertion code
_X = slice(30, 38)
_Y = slice(38, 46)
_Z = slice(46, 54)


class PdbCaReader(Reader):
    """Reads one Cα per residue from the ATOM records of the first model."""

    suffixes = (".pdb", ".ent")

    def _sniff(self, head: list[str]) -> bool:
        return any(line[_RECORD].strip() in ("ATOM", "HEADER") for line in head)

    def extract(self, text: str) -> ProteinStructure:
        labels, positions = [], []
        seen = set()

        for line_no, line in enumerate(text.splitlines(), start=1):
            record = line[_RECORD].strip()
            if record == "ENDMDL":
                break
            if record != "ATOM" or line[_ATOM_NAME].strip() != "CA":
                continue
            key = line[_RESIDUE_KEY]
            if key in seen:
                logger.debug("skipping extra CA for residue %r at line %d", key, line_no)
                continue
            try:
                xyz = [float(line[col]) for col in (_X, _Y, _Z)]
            except ValueError:
                raise ParseError("unparseable coordinate columns", line_no) from None
            seen.add(key)
            labels.append(line[_RES_NAME].strip())
            positions.append(xyz)

        if not positions:
            raise ParseError("zero CA atoms found")
        return ProteinStructure(labels=tuple(labels), positions=positions)


def parse_pdb_ca(text: str) -> ProteinStructure:
    return PdbCaReader().extract(text)
