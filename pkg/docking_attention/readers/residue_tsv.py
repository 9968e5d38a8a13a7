import logging
import math

from docking_attention.errors import ParseError
from docking_attention.readers.reader import Reader, tsv_rows
from docking_attention.structures import ProteinStructure

logger = logging.getLogger(__name__)

_COLUMN_INDEX = 0
_COLUMN_LABEL = 1
_COLUMN_X = 2
_N_COLUMNS = 5


class ResidueTsvReader(Reader):
    """``index<TAB>label<TAB>x<TAB>y<TAB>z`` per line, ``#`` comments."""

    suffixes = (".tsv",)

    def _sniff(self, head: list[str]) -> bool:
        for line in head:
            if line.strip() and not line.startswith("#"):
                return len(line.rstrip("\n").split("\t")) == _N_COLUMNS
        return False

    def extract(self, text: str) -> ProteinStructure:
        indices, labels, positions = [], [], []
        seen = set()

        for line_no, fields in tsv_rows(text):
            if len(fields) != _N_COLUMNS:
                raise ParseError("malformed line", line_no)
            try:
                index = int(fields[_COLUMN_INDEX])
                xyz = [float(v) for v in fields[_COLUMN_X : _COLUMN_X + 3]]
            except ValueError:
                raise ParseError("malformed line", line_no) from None
            if not all(math.isfinite(c) for c in xyz):
                raise ParseError("non-finite coordinate", line_no)
            if index in seen:
                raise ParseError(f"duplicate index {index}", line_no)
            if indices and index != indices[-1] + 1:
                raise ParseError(f"non-contiguous index {index}", line_no)
            seen.add(index)
            indices.append(index)
            labels.append(fields[_COLUMN_LABEL].strip())
            positions.append(xyz)

        if not indices:
            raise ParseError("empty file")
        if indices[0] != 1:
            logger.debug("renumbering residues %d..%d to 1..n", indices[0], indices[-1])
        return ProteinStructure(labels=tuple(labels), positions=positions)


def parse_protein_tsv(text: str) -> ProteinStructure:
    return ResidueTsvReader().extract(text)
