import hashlib
import json

import numpy as np
import pytest

from gsca.matrix_io import (
    DataFileError, write_matrix, read_matrix, write_vector,
    file_digest, write_json, ManifestTimer,
)

rng = np.random.default_rng(42)


class TestMatrixRoundTrip:
    def test_bit_exact_doubles(self, tmp_path):
        M = np.array([[1.0 / 3.0, np.pi, 1e-17],
                      [-2.5e8, 0.1, 5e-324]])
        p = tmp_path / "m.csv"
        write_matrix(p, M)
        assert np.array_equal(read_matrix(p), M)

    def test_mask_written_as_na(self, tmp_path):
        M = rng.normal(size=(4, 3))
        mask = np.ones_like(M)
        mask[1, 2] = 0.0
        mask[3, 0] = 0.0
        p = tmp_path / "m.csv"
        write_matrix(p, M, mask=mask)
        text = p.read_text()
        assert text.count("NA") == 2
        back = read_matrix(p)
        assert np.isnan(back[1, 2]) and np.isnan(back[3, 0])
        obs = mask == 1.0
        assert np.array_equal(back[obs], M[obs])

    def test_nan_cells_round_trip_as_na(self, tmp_path):
        M = np.array([[1.0, np.nan], [np.nan, 4.0]])
        p = tmp_path / "m.csv"
        write_matrix(p, M)
        back = read_matrix(p)
        assert np.array_equal(np.isnan(back), np.isnan(M))
        assert back[0, 0] == 1.0 and back[1, 1] == 4.0

    def test_vector_roundtrip(self, tmp_path):
        v = np.array([1.5, -0.25, 1e300])
        p = tmp_path / "v.csv"
        write_vector(p, v, name="weight")
        back = read_matrix(p)
        assert back.shape == (3, 1)
        assert np.array_equal(back.ravel(), v)

    def test_header_names_use_prefix(self, tmp_path):
        p = tmp_path / "m.csv"
        write_matrix(p, np.zeros((2, 2)), prefix="gene")
        header = p.read_text().splitlines()[0]
        assert header == "gene0,gene1"

    def test_rejects_non_matrix(self, tmp_path):
        with pytest.raises(ValueError):
            write_matrix(tmp_path / "m.csv", np.zeros(3))


class TestReadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFileError):
            read_matrix(tmp_path / "absent.csv")

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("c0,c1\n1.0,2.0\n3.0\n")
        with pytest.raises(DataFileError, match="bad.csv"):
            read_matrix(p)

    def test_bad_cell_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("c0,c1\n1.0,2.0\n3.0,spam\n")
        with pytest.raises(DataFileError, match=r":3: bad cell"):
            read_matrix(p)

    def test_empty_and_header_only_files(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(DataFileError):
            read_matrix(p)
        p2 = tmp_path / "header.csv"
        p2.write_text("c0,c1\n")
        with pytest.raises(DataFileError, match="no data rows"):
            read_matrix(p2)


class TestDigestAndJson:
    def test_digest_is_sha256(self, tmp_path):
        p = tmp_path / "x.bin"
        p.write_bytes(b"hello world")
        assert file_digest(p) == hashlib.sha256(b"hello world").hexdigest()

    def test_write_json_sorted_and_readable(self, tmp_path):
        p = tmp_path / "d.json"
        write_json(p, {"b": 2, "a": [1.5, None]})
        text = p.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"b": 2, "a": [1.5, None]}

    def test_manifest_timer(self, tmp_path):
        data = tmp_path / "in.csv"
        data.write_text("c0\n1.0\n")
        t = ManifestTimer("fit", {"lam": 2.0})
        t.add_input("x1", data)
        out = tmp_path / "manifest.json"
        t.write(out, "0.0-test")
        m = json.loads(out.read_text())
        assert m["command"] == "fit"
        assert m["parameters"]["lam"] == 2.0
        assert m["version"] == "0.0-test"
        assert m["wall_seconds"] >= 0.0
        assert m["input_digests"]["x1"] == file_digest(data)
