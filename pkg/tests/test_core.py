import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otdebias.core import (
    DataError,
    Rng,
    ShapeError,
    as_tensor,
    flatten_index,
    normal_sample,
    read_ndt,
    tensor_new,
    unflatten_index,
    write_ndt,
)

shapes = st.lists(st.integers(1, 6), min_size=1, max_size=4).map(tuple)


class TestTensor:
    def test_new_fills_and_is_float64(self):
        t = tensor_new((2, 3), 1.5)
        assert t.dtype == np.float64
        np.testing.assert_array_equal(t, np.full((2, 3), 1.5))

    @pytest.mark.parametrize("shape", [(0,), (2, 0), (), (-1, 3)])
    def test_bad_extents(self, shape):
        with pytest.raises(ShapeError):
            tensor_new(shape)

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError):
            as_tensor([1.0, np.nan])
        with pytest.raises(DataError):
            tensor_new((2,), np.inf)

    def test_reshape_mismatch(self):
        with pytest.raises(ShapeError):
            as_tensor(np.arange(6), (4, 2))

    @given(shapes, st.data())
    def test_index_round_trip(self, shape, data):
        size = int(np.prod(shape))
        off = data.draw(st.integers(0, size - 1))
        assert flatten_index(unflatten_index(off, shape), shape) == off
        assert flatten_index(unflatten_index(off, shape), shape) < size


class TestRng:
    def test_same_seed_same_stream(self):
        a = normal_sample(Rng(11), (1_000_000,))
        b = normal_sample(Rng(11), (1_000_000,))
        np.testing.assert_array_equal(a, b)

    def test_different_seed_differs(self):
        assert not np.array_equal(Rng(1).normal((10,)), Rng(2).normal((10,)))

    def test_moments(self):
        x = Rng(3).normal((200_000,))
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.01

    def test_splits_independent_and_reproducible(self):
        a1, b1 = Rng(5).split(2)
        a2, _ = Rng(5).split(2)
        np.testing.assert_array_equal(a1.normal((50,)), a2.normal((50,)))
        assert not np.array_equal(Rng(5).split(2)[0].normal((50,)), b1.normal((50,)))


class TestNDT:
    @settings(max_examples=30)
    @given(shapes, st.integers(0, 2**32 - 1))
    def test_round_trip_is_bit_exact(self, tmp_path_factory, shape, seed):
        path = tmp_path_factory.mktemp("ndt") / "t.ndt"
        t = Rng(seed).normal(shape)
        write_ndt(path, t)
        back = read_ndt(path)
        assert back.shape == t.shape
        assert back.tobytes() == t.tobytes()

    def test_header_layout(self, tmp_path):
        path = tmp_path / "x.ndt"
        write_ndt(path, np.ones((2, 2)))
        raw = path.read_bytes()
        assert raw[:4] == b"NDT1"
        hlen = int.from_bytes(raw[4:8], "little")
        assert len(raw) == 8 + hlen + 4 * 8

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.ndt"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(DataError):
            read_ndt(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "x.ndt"
        write_ndt(path, np.ones(4))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(DataError):
            read_ndt(path)
