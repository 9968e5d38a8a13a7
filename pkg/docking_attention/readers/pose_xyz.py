import math
from pathlib import Path
from typing import Sequence

from docking_attention.errors import ParseError, ValidationError
from docking_attention.readers.reader import Reader, read_text
from docking_attention.structures import PoseEnsemble


class PoseXyzReader(Reader):
    """Standard XYZ: atom count, free comment line, then ``element x y z``.

    One document is one pose; ``extract_ensemble`` stacks several of them.
    """

    suffixes = (".xyz",)

    def _sniff(self, head: list[str]) -> bool:
        return bool(head) and head[0].strip().isdigit()

    def extract(self, text: str) -> tuple[list[str], list[list[float]]]:
        lines = text.splitlines()
        if not lines:
            raise ParseError("empty pose stream")
        try:
            count = int(lines[0].strip())
        except ValueError:
            raise ParseError("invalid atom count", 1) from None

        elements, coords = [], []
        for line_no, line in enumerate(lines[2:], start=3):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) < 4:
                raise ParseError("malformed atom line", line_no)
            try:
                xyz = [float(v) for v in fields[1:4]]
            except ValueError:
                raise ParseError("malformed atom line", line_no) from None
            if not all(math.isfinite(c) for c in xyz):
                raise ParseError("non-finite coordinate", line_no)
            elements.append(fields[0])
            coords.append(xyz)

        if len(elements) != count:
            raise ParseError(
                f"count line says {count} atoms but found {len(elements)} atom lines"
            )
        if count < 1:
            raise ParseError("pose has no atoms")
        return elements, coords

    def extract_ensemble(self, texts: Sequence[str]) -> PoseEnsemble:
        if not texts:
            raise ValidationError("pose ensemble needs at least one pose")
        poses = []
        reference = None
        for k, text in enumerate(texts, start=1):
            try:
                elements, coords = self.extract(text)
            except ParseError as e:
                raise ParseError(f"pose {k}: {e}") from e
            if reference is None:
                reference = elements
            elif elements != reference:
                raise ValidationError(f"pose atom mismatch: pose {k} differs from pose 1")
            poses.append(coords)
        return PoseEnsemble(elements=tuple(reference), coordinates=poses)

    def extract_files(self, files: Sequence[str | Path]) -> PoseEnsemble:
        return self.extract_ensemble([read_text(f) for f in files])


def parse_pose_xyz(texts: Sequence[str]) -> PoseEnsemble:
    return PoseXyzReader().extract_ensemble(texts)
