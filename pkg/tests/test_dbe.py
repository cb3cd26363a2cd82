import numpy as np
import pytest

from encoders.dbe import (
    EncodedGroup, decompose_group, deinterleave_pair, interleave_pair, mask_bytes, mask_from_bytes,
    mask_to_bytes, recompose_group, recompose_lanes,
)
from engine.vector_engine import VectorEngine
from errors import FormatError


class TestDecomposeGroup:
    def test_small_values_need_no_masks(self):
        enc = decompose_group([0, 0, 1, 0], 4)
        assert enc == EncodedGroup((0, 0, 1, 0), 0b000, ())

    def test_outliers(self):
        enc = decompose_group([5, 20, 3, 37], 4)
        assert enc.base_nibbles == (5, 4, 3, 5)
        assert enc.tracking_bitmap == 0b011
        assert enc.masks == (0b0010, 0b1000)

    def test_maximum(self):
        enc = decompose_group([127] * 4, 4)
        assert enc.base_nibbles == (15,) * 4
        assert enc.tracking_bitmap == 0b111
        assert enc.masks == (0b1111,) * 3

    def test_rejects_value_above_127(self):
        with pytest.raises(ValueError):
            decompose_group([128], 4)

    def test_rejects_too_many_lanes(self):
        with pytest.raises(ValueError):
            decompose_group([0] * 5, 4)

    def test_zero_mask_never_stored(self):
        with pytest.raises(ValueError):
            EncodedGroup((0, 0), 0b001, (0,))


class TestRecompose:
    def test_outliers(self, engine4):
        assert recompose_group(decompose_group([5, 20, 3, 37], 4), engine4) == (5, 20, 3, 37)

    def test_base_only(self, engine4):
        assert recompose_group(EncodedGroup((9, 0, 0, 0), 0, ()), engine4) == (9, 0, 0, 0)

    def test_partial_group(self, engine4):
        assert recompose_group(decompose_group([100, 17], 4), engine4) == (100, 17)

    def test_counts_one_recomposition(self, engine4):
        recompose_group(decompose_group([5, 20, 3, 37], 4), engine4)
        assert engine4.counters.group_recompositions == 1
        assert engine4.counters.vector_ops == 3

    def test_underrun(self, engine4):
        nibbles = np.zeros(4, dtype=np.uint8)
        with pytest.raises(FormatError):
            recompose_lanes(nibbles, 0b011, iter([0b0001]), engine4)

    @pytest.mark.parametrize("g", [2, 4, 8, 16, 32])
    def test_randomized_identity(self, g):
        rng = np.random.default_rng(100 + g)
        engine = VectorEngine(g)
        for _ in range(2000):
            count = int(rng.integers(1, g + 1))
            # mostly small deltas with occasional outliers
            deltas = np.where(rng.random(count) < 0.1, rng.integers(0, 128, count), rng.integers(0, 16, count))
            enc = decompose_group(deltas.tolist(), g)
            assert len(enc.masks) == bin(enc.tracking_bitmap).count("1")
            assert recompose_group(enc, engine) == tuple(deltas.tolist())


class TestInterleave:
    def test_pair(self):
        a = decompose_group([0, 0, 1, 0], 4)
        b = decompose_group([5, 4, 3, 5], 4)
        assert interleave_pair(a, b, 4) == bytes([0x05, 0x04, 0x13, 0x05])

    def test_absent_second_group(self):
        a = decompose_group([15] * 4, 4)
        assert interleave_pair(a, None, 4) == bytes([0xF0] * 4)

    def test_partial_second_group(self):
        a = decompose_group([1, 2, 3, 4], 4)
        b = decompose_group([9], 4)
        assert interleave_pair(a, b, 4) == bytes([0x19, 0x20, 0x30, 0x40])

    def test_deinterleave_example(self, engine4):
        upper, lower = deinterleave_pair(bytes([0x05, 0x04, 0x13, 0x05]), 4, engine4)
        assert upper.tolist() == [0, 0, 1, 0]
        assert lower.tolist() == [5, 4, 3, 5]
        assert engine4.counters.contiguous_loads == 1

    def test_deinterleave_wrong_length(self):
        with pytest.raises(FormatError):
            deinterleave_pair(bytes(3), 4)

    @pytest.mark.parametrize("g", [2, 8, 16, 32])
    def test_randomized_inverse(self, g):
        rng = np.random.default_rng(g)
        engine = VectorEngine(g)
        for _ in range(500):
            a = decompose_group(rng.integers(0, 128, g).tolist(), g)
            b_count = int(rng.integers(0, g + 1))
            b = decompose_group(rng.integers(0, 128, b_count).tolist(), g) if b_count else None
            upper, lower = deinterleave_pair(interleave_pair(a, b, g), g, engine)
            assert tuple(upper.tolist()) == a.base_nibbles
            expected_lower = (b.base_nibbles if b else ()) + (0,) * (g - (b_count if b else 0))
            assert tuple(lower.tolist()) == expected_lower


class TestMasks:
    @pytest.mark.parametrize("g, expected", [(2, 1), (4, 1), (8, 1), (16, 2), (32, 4)])
    def test_mask_bytes(self, g, expected):
        assert mask_bytes(g) == expected

    def test_mask_byte_order(self):
        assert mask_to_bytes(0x0102, 16) == b"\x02\x01"
        assert mask_from_bytes(b"\x02\x01") == 0x0102


@pytest.mark.slow
class TestGroupVolume:
    GROUPS_PER_SIZE = 20_000

    @pytest.mark.parametrize("g", [2, 4, 8, 16, 32])
    def test_pairs_survive_interleave_and_recompose(self, g):
        rng = np.random.default_rng(7000 + g)
        engine = VectorEngine(g)
        for _ in range(self.GROUPS_PER_SIZE // 2):
            counts = rng.integers(1, g + 1, 2)
            outlier_rate = float(rng.choice([0.0, 0.05, 0.3, 1.0]))
            pair = []
            for count in counts.tolist():
                deltas = np.where(rng.random(count) < outlier_rate,
                                  rng.integers(16, 128, count), rng.integers(0, 16, count))
                pair.append((deltas.tolist(), decompose_group(deltas.tolist(), g)))

            (a_deltas, a), (b_deltas, b) = pair
            upper, lower = deinterleave_pair(interleave_pair(a, b, g), g, engine)
            assert upper.tolist() == list(a.base_nibbles) + [0] * (g - len(a_deltas))
            assert lower.tolist() == list(b.base_nibbles) + [0] * (g - len(b_deltas))

            # nibbles straight from the interleaved block, as the decoder consumes them
            lanes = recompose_lanes(upper, a.tracking_bitmap, iter(a.masks), engine)
            assert lanes.tolist() == a_deltas + [0] * (g - len(a_deltas))
            assert recompose_group(b, engine) == tuple(b_deltas)
        assert engine.counters.group_recompositions == self.GROUPS_PER_SIZE
