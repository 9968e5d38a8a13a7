import numpy as np
import pytest

from conftest import pdb_atom
from docking_attention.errors import ParseError, ValidationError
from docking_attention.readers import (
    PdbCaReader,
    ResidueTsvReader,
    identify_protein_reader,
    parse_embeddings,
    parse_pdb_ca,
    parse_pose_xyz,
    parse_protein_tsv,
)
from docking_attention.structures import (
    EmbeddingMatrix,
    PoseEnsemble,
    ProteinStructure,
    format_embeddings_tsv,
    format_pose_xyz,
    format_protein_tsv,
)


def xyz_doc(atoms, comment="pose"):
    lines = [str(len(atoms)), comment] + [f"{e} {x} {y} {z}" for e, (x, y, z) in atoms]
    return "\n".join(lines) + "\n"


class TestResidueTsv:
    def test_single_residue(self):
        protein = parse_protein_tsv("1\tALA\t0.0\t0.0\t0.0")
        assert protein.n == 1
        assert protein.labels == ("ALA",)
        np.testing.assert_array_equal(protein.position(1), [0.0, 0.0, 0.0])

    def test_order_preserved(self):
        protein = parse_protein_tsv("1\tALA\t0\t0\t0\n2\tGLY\t1\t2\t3\n")
        assert protein.labels == ("ALA", "GLY")
        np.testing.assert_array_equal(protein.position(2), [1.0, 2.0, 3.0])

    def test_renumbered_from_any_start(self):
        protein = parse_protein_tsv("# chain A\n17\tALA\t0\t0\t0\n18\tGLY\t1\t0\t0\n")
        assert list(protein.indices) == [1, 2]
        assert protein.labels == ("ALA", "GLY")

    def test_windows_line_endings(self):
        protein = parse_protein_tsv("1\tALA\t0\t0\t0\r\n2\tGLY\t1\t2\t3\r\n")
        assert protein.labels == ("ALA", "GLY")
        np.testing.assert_array_equal(protein.position(2), [1.0, 2.0, 3.0])

    def test_line_numbers_count_comments_and_blanks(self):
        with pytest.raises(ParseError, match="malformed line at line 4"):
            parse_protein_tsv("# chain A\n1\tALA\t0\t0\t0\n\n2\tGLY\t0\t0\n")

    def test_non_finite_coordinate(self):
        with pytest.raises(ParseError, match="non-finite coordinate at line 1"):
            parse_protein_tsv("1\tALA\tNaN\t0\t0")

    @pytest.mark.parametrize(
        "text, message",
        [
            ("1\tALA\t0\t0\n", "malformed line at line 1"),
            ("1\tALA\t0\t0\tz\n", "malformed line at line 1"),
            ("1\tALA\t0\t0\t0\n1\tGLY\t0\t0\t1\n", "duplicate index 1 at line 2"),
            ("1\tALA\t0\t0\t0\n3\tGLY\t0\t0\t1\n", "non-contiguous index 3 at line 2"),
            ("# nothing\n\n", "empty file"),
        ],
    )
    def test_errors(self, text, message):
        with pytest.raises(ParseError, match=message):
            parse_protein_tsv(text)

    def test_round_trip(self):
        protein = ProteinStructure(
            labels=("MET", "LYS", "TRP"),
            positions=[[1.23456, -2.5, 0.0], [10.125, 3.75, -0.5], [7.0, 8.0, 9.0]],
        )
        again = parse_protein_tsv(format_protein_tsv(protein))
        assert again.labels == protein.labels
        np.testing.assert_array_equal(again.positions, protein.positions)


class TestPdbCa:
    def test_three_residues(self):
        text = "\n".join(
            [
                "HEADER    TEST",
                pdb_atom(1, "N", "ALA", 1, (0.0, 0.0, 0.0)),
                pdb_atom(2, "CA", "ALA", 1, (1.0, 0.0, 0.0)),
                pdb_atom(3, "CA", "GLY", 2, (4.8, 0.0, 0.0)),
                pdb_atom(4, "CA", "SER", 3, (8.6, 1.0, -1.0)),
                "END",
            ]
        )
        protein = parse_pdb_ca(text)
        assert protein.labels == ("ALA", "GLY", "SER")
        np.testing.assert_allclose(protein.position(3), [8.6, 1.0, -1.0])

    def test_only_hetatm(self):
        text = pdb_atom(1, "CA", "HOH", 1, (0.0, 0.0, 0.0), record="HETATM")
        with pytest.raises(ParseError, match="zero CA atoms"):
            parse_pdb_ca(text)

    def test_ca_and_cb_in_one_residue(self):
        text = "\n".join(
            [
                pdb_atom(1, "CA", "ALA", 1, (1.0, 2.0, 3.0)),
                pdb_atom(2, "CB", "ALA", 1, (9.0, 9.0, 9.0)),
            ]
        )
        protein = parse_pdb_ca(text)
        assert protein.n == 1
        np.testing.assert_allclose(protein.position(1), [1.0, 2.0, 3.0])

    def test_first_model_only(self):
        text = "\n".join(
            [
                "MODEL        1",
                pdb_atom(1, "CA", "ALA", 1, (0.0, 0.0, 0.0)),
                "ENDMDL",
                "MODEL        2",
                pdb_atom(1, "CA", "ALA", 1, (5.0, 0.0, 0.0)),
                pdb_atom(2, "CA", "GLY", 2, (9.0, 0.0, 0.0)),
                "ENDMDL",
            ]
        )
        assert parse_pdb_ca(text).n == 1

    def test_unparseable_coordinates(self):
        line = pdb_atom(1, "CA", "ALA", 1, (0.0, 0.0, 0.0))
        line = line[:30] + "   abc.d" + line[38:]
        with pytest.raises(ParseError, match="unparseable coordinate columns at line 1"):
            parse_pdb_ca(line)


class TestPoseXyz:
    def test_single_pose(self):
        poses = parse_pose_xyz([xyz_doc([("C", (0, 0, 0)), ("O", (1.2, 0, 0))])])
        assert (poses.k, poses.n_atoms) == (1, 2)
        assert poses.elements == ("C", "O")

    def test_two_poses(self):
        poses = parse_pose_xyz(
            [
                xyz_doc([("C", (0, 0, 0)), ("O", (1.2, 0, 0))]),
                xyz_doc([("C", (1, 1, 1)), ("O", (2.2, 1, 1))]),
            ]
        )
        assert poses.k == 2
        np.testing.assert_array_equal(poses.coordinates[1, 0], [1.0, 1.0, 1.0])

    def test_element_order_mismatch(self):
        with pytest.raises(ValidationError, match="pose atom mismatch"):
            parse_pose_xyz(
                [
                    xyz_doc([("C", (0, 0, 0)), ("O", (1, 0, 0))]),
                    xyz_doc([("O", (0, 0, 0)), ("C", (1, 0, 0))]),
                ]
            )

    def test_count_line_mismatch(self):
        text = "3\ncomment\nC 0 0 0\nO 1 0 0\n"
        with pytest.raises(ParseError, match="count line says 3"):
            parse_pose_xyz([text])

    def test_round_trip(self):
        poses = PoseEnsemble(
            elements=("C", "N"),
            coordinates=[[[0.5, 1.5, -2.25], [3.0, 4.0, 5.0]], [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]],
        )
        again = parse_pose_xyz(format_pose_xyz(poses))
        assert again.elements == poses.elements
        np.testing.assert_array_equal(again.coordinates, poses.coordinates)


class TestEmbeddings:
    def test_square(self):
        matrix = parse_embeddings("1.0\t2.0\n3.0\t4.0")
        np.testing.assert_array_equal(matrix.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_single_value(self):
        assert parse_embeddings("5.0").values.shape == (1, 1)

    def test_windows_line_endings(self):
        matrix = parse_embeddings("1.0\t2.0\r\n3.0\t4.0\r\n")
        np.testing.assert_array_equal(matrix.values, [[1.0, 2.0], [3.0, 4.0]])

    @pytest.mark.parametrize(
        "text, message",
        [
            ("1.0\n1.0\t2.0", "ragged row 2"),
            ("1.0\tnan\n", "non-finite entry at row 1, column 2"),
            ("", "empty input"),
            ("1.0\tx\n", "unparseable value at line 1"),
        ],
    )
    def test_errors(self, text, message):
        with pytest.raises(ParseError, match=message):
            parse_embeddings(text)

    def test_round_trip(self):
        matrix = EmbeddingMatrix([[0.125, -3.5], [1e-3, 42.0]])
        again = parse_embeddings(format_embeddings_tsv(matrix))
        np.testing.assert_array_equal(again.values, matrix.values)


class TestIdentify:
    def test_by_suffix(self, tmp_path):
        pdb = tmp_path / "model.pdb"
        pdb.write_text(pdb_atom(1, "CA", "ALA", 1, (0.0, 0.0, 0.0)))
        tsv = tmp_path / "residues.tsv"
        tsv.write_text("1\tALA\t0\t0\t0\n")
        assert isinstance(identify_protein_reader(pdb), PdbCaReader)
        assert isinstance(identify_protein_reader(tsv), ResidueTsvReader)

    def test_by_content(self, tmp_path):
        path = tmp_path / "residues.txt"
        path.write_text("1\tALA\t0\t0\t0\n")
        assert isinstance(identify_protein_reader(path), ResidueTsvReader)

    def test_missing_file(self, tmp_path):
        missing = tmp_path / "nope.tsv"
        with pytest.raises(ParseError, match="nope.tsv"):
            identify_protein_reader(missing)


class TestStructures:
    def test_position_out_of_range(self, protein):
        with pytest.raises(ValidationError):
            protein.position(protein.n + 1)

    def test_embedding_pairing(self, protein):
        with pytest.raises(ValidationError, match="residue count"):
            EmbeddingMatrix(np.zeros((protein.n + 1, 3))).check_pairs_with(protein)

    def test_union_requires_same_atoms(self, poses):
        other = PoseEnsemble(elements=("C",) * poses.n_atoms, coordinates=np.zeros((1, poses.n_atoms, 3)))
        with pytest.raises(ValidationError, match="pose atom mismatch"):
            poses.union(other)

    def test_values_are_read_only(self, protein):
        with pytest.raises(ValueError):
            protein.positions[0, 0] = 1.0
