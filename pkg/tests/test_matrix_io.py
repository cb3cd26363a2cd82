import struct

import pytest

from conftest import random_matrix
from errors import FormatError
from matrix.binary import dense_from_bytes, dense_to_bytes, load_dense_binary, load_matrix, store_dense_binary
from matrix.dense import DenseMatrixI8
from matrix.market import MARKET_HEADER, load_matrix_market, store_matrix_market


def write(tmp_path, text, name="m.mtx"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestMatrixMarket:
    def test_reads_single_entry(self, tmp_path, small_matrix):
        path = write(tmp_path, f"{MARKET_HEADER}\n2 2 1\n1 2 -5\n")
        assert load_matrix_market(path) == small_matrix

    def test_empty_entry_list(self, tmp_path):
        path = write(tmp_path, f"{MARKET_HEADER}\n3 3 0\n")
        assert load_matrix_market(path) == DenseMatrixI8.zeros(3, 3)

    def test_comments_are_skipped(self, tmp_path, small_matrix):
        path = write(tmp_path, f"{MARKET_HEADER}\n% pruned layer\n2 2 1\n% entry\n1 2 -5\n")
        assert load_matrix_market(path) == small_matrix

    def test_round_trip(self, tmp_path):
        m = random_matrix(64, 64, 0.85, seed=5)
        path = tmp_path / "r.mtx"
        assert store_matrix_market(m, path) == m.nnz
        assert load_matrix_market(path) == m

    @pytest.mark.parametrize("text", [
        "%%MatrixMarket matrix array real general\n2 2 1\n1 1 1\n",
        f"{MARKET_HEADER}\n2 2\n",
        f"{MARKET_HEADER}\n2 2 1\n3 1 4\n",
        f"{MARKET_HEADER}\n2 2 1\n1 1 200\n",
        f"{MARKET_HEADER}\n2 2 2\n1 1 1\n",
        f"{MARKET_HEADER}\n2 2 1\n1 x 1\n",
        f"{MARKET_HEADER}\n2 2 2\n1 2 3\n1 2 -3\n",
    ], ids=["header", "size-line", "index", "value", "count", "non-integer", "duplicate"])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(FormatError):
            load_matrix_market(write(tmp_path, text))


class TestDenseBinary:
    def test_reads_example(self):
        blob = b"DMI8" + struct.pack("<II", 1, 2) + bytes([0x01, 0xFF])
        assert dense_from_bytes(blob) == DenseMatrixI8.from_array([[1, -1]])

    def test_zero_rows_rejected(self):
        with pytest.raises(FormatError):
            dense_from_bytes(b"DMI8" + struct.pack("<II", 0, 2))

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            dense_from_bytes(b"XXXX" + struct.pack("<II", 1, 1) + b"\x00")

    def test_truncated(self):
        with pytest.raises(FormatError):
            dense_from_bytes(b"DMI8" + struct.pack("<II", 2, 2) + b"\x01\x02")

    def test_round_trip(self, tmp_path):
        m = random_matrix(100, 37, 0.3, seed=9)
        path = tmp_path / "m.bin"
        store_dense_binary(m, path)
        assert load_dense_binary(path) == m
        assert dense_from_bytes(dense_to_bytes(m)) == m


class TestLoadMatrix:
    def test_dispatches_on_magic(self, tmp_path, small_matrix):
        binary = tmp_path / "m.bin"
        market = tmp_path / "m.mtx"
        store_dense_binary(small_matrix, binary)
        store_matrix_market(small_matrix, market)
        assert load_matrix(binary) == small_matrix
        assert load_matrix(market) == small_matrix
