import math

from docking_attention.errors import ParseError
from docking_attention.readers.reader import Reader, tsv_rows
from docking_attention.structures import EmbeddingMatrix


class EmbeddingTsvReader(Reader):
    """n lines of d tab-separated floats, no header. ``#`` lines are skipped."""

    suffixes = (".emb", ".tsv")

    def extract(self, text: str) -> EmbeddingMatrix:
        rows = []
        for line_no, fields in tsv_rows(text):
            try:
                row = [float(v) for v in fields]
            except ValueError:
                raise ParseError("unparseable value", line_no) from None
            if rows and len(row) != len(rows[0]):
                raise ParseError(f"ragged row {len(rows) + 1}")
            for col, value in enumerate(row, start=1):
                if not math.isfinite(value):
                    raise ParseError(
                        f"non-finite entry at row {len(rows) + 1}, column {col}"
                    )
            rows.append(row)

        if not rows:
            raise ParseError("empty input")
        return EmbeddingMatrix(rows)


def parse_embeddings(text: str) -> EmbeddingMatrix:
    return EmbeddingTsvReader().extract(text)
