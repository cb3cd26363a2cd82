import numpy as np
import pytest

from conftest import random_matrix
from encoders.dcsr import (
    DcsrMatrix, decode_matrix, decode_row_groups, deserialize, encode_matrix, footprint,
    group_metadata_bytes, serialize,
)
from engine.vector_engine import VectorEngine
from errors import FormatError
from matrix.dense import DenseMatrixI8


class TestEncodeExample:
    def test_streams(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        assert d.values.tolist() == [1, 2, 3, 4, 5, 6]
        assert d.slopes.tolist() == [3]
        assert d.intercept_deltas.tolist() == [0, 0]
        assert d.tracking.tolist() == [0, 0]
        assert d.base_nibbles.tolist() == [0x00, 0x00, 0x10, 0x00]
        assert d.row_ptr.tolist() == [0, 6]
        assert d.mask_ptr.tolist() == [0, 0]
        assert d.masks.size == 0

    def test_footprint(self, example_row_matrix):
        fp = footprint(encode_matrix(example_row_matrix, group_size=4))
        assert (fp.values_bytes, fp.padding_bytes, fp.metadata_bytes) == (6, 0, 26)
        assert fp.components == {
            "row_ptr": 8, "mask_ptr": 8, "slopes": 2, "intercept_deltas": 2,
            "tracking": 2, "base_nibbles": 4, "masks": 0,
        }
        assert fp.total_bytes == 32
        assert fp.compression_ratio == pytest.approx(16 / 32)

    def test_golden_bytes(self, example_row_matrix, golden_bytes):
        d = encode_matrix(example_row_matrix, group_size=4)
        blob = serialize(d)
        assert blob == golden_bytes
        assert len(blob) == footprint(d).total_bytes + footprint(d).container_overhead_bytes

    def test_decode_row_groups(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        groups = list(decode_row_groups(d, 0, VectorEngine(4)))
        assert [g.base for g in groups] == [0, 12]
        assert groups[0].offsets.tolist() == [0, 3, 7, 9]
        assert groups[1].offsets.tolist() == [0, 3, 0, 0]
        assert [g.lanes for g in groups] == [4, 2]
        assert [g.value_start for g in groups] == [0, 4]


class TestRoundTrip:
    def test_all_zero(self):
        m = DenseMatrixI8.zeros(8, 8)
        d = encode_matrix(m)
        assert d.row_ptr.tolist() == [0] * 9
        assert d.total_groups == 0 and d.total_elements == 0
        assert decode_matrix(d) == m
        fp = footprint(d)
        assert fp.values_bytes == fp.padding_bytes == 0
        assert fp.metadata_bytes == fp.components["row_ptr"] + fp.components["mask_ptr"] + fp.components["slopes"]

    def test_example(self, example_row_matrix):
        assert decode_matrix(encode_matrix(example_row_matrix, group_size=4)) == example_row_matrix

    def test_dense_matrix(self):
        m = random_matrix(17, 33, 0.0, seed=2)
        assert decode_matrix(encode_matrix(m)) == m

    @pytest.mark.parametrize("g", [2, 4, 8, 16, 32])
    def test_group_sizes(self, g):
        m = random_matrix(40, 300, 0.9, seed=g)
        d = encode_matrix(m, group_size=g)
        assert decode_matrix(d) == m
        assert deserialize(serialize(d)) == d

    def test_random_256(self):
        m = random_matrix(256, 256, 0.9, seed=42)
        d = encode_matrix(m)
        assert decode_matrix(d) == m

    def test_randomized_shapes(self):
        rng = np.random.default_rng(2024)
        for case in range(60):
            rows, cols = (int(v) for v in rng.integers(1, 200, 2))
            sparsity = float(rng.choice([0.0, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98]))
            m = random_matrix(rows, cols, sparsity, seed=case)
            d = encode_matrix(m)
            assert decode_matrix(d) == m
            assert deserialize(serialize(d, with_crc=bool(case % 2))) == d


class TestSerialization:
    def test_round_trip_example(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        assert deserialize(serialize(d)) == d

    def test_crc_trailer(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        blob = serialize(d, with_crc=True)
        assert len(blob) == 72
        assert blob[7] == 0x01
        assert deserialize(blob) == d

    def test_crc_mismatch(self, example_row_matrix):
        blob = bytearray(serialize(encode_matrix(example_row_matrix, group_size=4), with_crc=True))
        blob[-6] ^= 0xFF
        with pytest.raises(FormatError):
            deserialize(bytes(blob))

    def test_truncated(self, golden_bytes):
        with pytest.raises(FormatError):
            deserialize(golden_bytes[:-4])

    def test_header_only_truncation(self, golden_bytes):
        with pytest.raises(FormatError):
            deserialize(golden_bytes[:10])

    def test_bad_magic(self, golden_bytes):
        with pytest.raises(FormatError):
            deserialize(b"XCSR" + golden_bytes[4:])

    def test_bad_version(self, golden_bytes):
        with pytest.raises(FormatError):
            deserialize(golden_bytes[:4] + b"\x02" + golden_bytes[5:])

    def test_non_zero_fill(self, golden_bytes):
        blob = bytearray(golden_bytes)
        blob[-1] = 0x01
        with pytest.raises(FormatError):
            deserialize(bytes(blob))

    def test_trailing_bytes(self, golden_bytes):
        with pytest.raises(FormatError):
            deserialize(golden_bytes + b"\x00" * 4)


class TestValidation:
    def _with(self, d: DcsrMatrix, **changes) -> DcsrMatrix:
        fields = {name: getattr(d, name) for name in (
            "rows", "cols", "group_size", "row_ptr", "slopes", "mask_ptr", "intercept_deltas",
            "tracking", "base_nibbles", "masks", "values")}
        fields.update(changes)
        return DcsrMatrix(**fields)

    def test_tracking_without_mask(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        with pytest.raises(FormatError):
            decode_matrix(self._with(d, tracking=np.array([1, 0], dtype=np.uint8)))

    def test_columns_out_of_order(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        with pytest.raises(FormatError):
            decode_matrix(self._with(d, intercept_deltas=np.array([0, -20], dtype=np.int8)))

    def test_column_outside_row(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        with pytest.raises(FormatError):
            decode_matrix(self._with(d, intercept_deltas=np.array([0, 5], dtype=np.int8)))

    def test_row_ptr_mismatch(self, example_row_matrix):
        d = encode_matrix(example_row_matrix, group_size=4)
        with pytest.raises(FormatError):
            self._with(d, row_ptr=np.array([0, 5], dtype=np.uint32)).validate()


class TestConstraintsOnCorpus:
    def test_every_group_within_bounds(self):
        for seed, sparsity in enumerate([0.5, 0.8, 0.9, 0.95, 0.98]):
            m = random_matrix(64, 700, sparsity, seed)
            d = encode_matrix(m)
            engine = VectorEngine(d.group_size)
            for r in range(d.rows):
                for group in decode_row_groups(d, r, engine):
                    offsets = group.offsets[:group.lanes].astype(np.int64)
                    deltas = offsets - np.arange(group.lanes) * int(d.slopes[r])
                    assert deltas.min() >= 0 and deltas.max() <= 127
                    assert offsets.max() <= 255
            assert d.intercept_deltas.min() >= -128 and d.intercept_deltas.max() <= 127


@pytest.mark.slow
class TestPaddingAndMetadata:
    def test_padding_at_90_percent(self):
        for seed in range(10):
            d = encode_matrix(random_matrix(276, 276, 0.9, seed))
            fp = footprint(d)
            assert fp.padding_bytes / fp.values_bytes <= 0.08

    def test_metadata_ratio_on_layer_shapes(self):
        # five pointwise layers plus the classifier of the large model
        shapes = [(276, 276)] * 5 + [(12, 16560)]
        metadata = values = 0
        for seed, (rows, cols) in enumerate(shapes):
            fp = footprint(encode_matrix(random_matrix(rows, cols, 0.9, seed)))
            metadata += group_metadata_bytes(fp)
            values += fp.values_bytes
        assert 0.82 <= metadata / values <= 1.11
