import csv
import io
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterator

from docking_attention.errors import ParseError


def read_text(file: str | Path) -> str:
    path = Path(file)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror or e}") from e


def tsv_rows(text: str) -> Iterator[tuple[int, list[str]]]:
    """``(line_no, fields)`` for every data row; blank and ``#`` lines are skipped."""
    reader = csv.reader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE)
    for fields in reader:
        if not any(f.strip() for f in fields) or fields[0].startswith("#"):
            continue
        yield reader.line_num, fields


class Reader(ABC):
    """One input format. ``identify`` decides whether a file is ours,
    ``extract`` turns its text into a value."""

    suffixes: tuple[str, ...] = ()

    def identify(self, file: str | Path) -> bool:
        path = Path(file)
        if path.suffix.lower() in self.suffixes:
            return True
        try:
            with open(path, encoding="utf-8") as f:
                head = [line for _, line in zip(range(20), f)]
        except (OSError, UnicodeDecodeError):
            return False
        return self._sniff(head)

    def _sniff(self, head: list[str]) -> bool:
        return False

    @abstractmethod
    def extract(self, text: str):
        raise NotImplementedError()

    def extract_file(self, file: str | Path):
        return self.extract(read_text(file))
