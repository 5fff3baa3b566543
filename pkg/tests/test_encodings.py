import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otdebias.core import ParameterError, ShapeError
from otdebias.encodings import (
    OMEGA_MAX,
    OMEGA_MIN,
    TaskRelation,
    encode_coord,
    encode_sky,
    frequencies,
    relate_tasks,
)

angles = st.floats(-720.0, 720.0, allow_nan=False)


class TestFrequencies:
    def test_endpoints_and_log_spacing(self):
        w = frequencies(16)
        assert w[0] == pytest.approx(OMEGA_MIN, rel=1e-14)
        assert w[-1] == pytest.approx(OMEGA_MAX, rel=1e-14)
        np.testing.assert_allclose(np.diff(np.log(w)), np.log(w[1] / w[0]), rtol=1e-12)

    def test_bad_k(self):
        with pytest.raises(ParameterError):
            frequencies(0)


class TestEncoding:
    @given(angles)
    def test_bounded(self, theta):
        e = encode_coord(theta)
        assert e.shape == (32,)
        assert np.all(np.abs(e) <= 1.0)

    @given(angles)
    def test_sin_cos_pairs_on_unit_circle(self, theta):
        e = encode_coord(theta, k=8)
        np.testing.assert_allclose(e[:8] ** 2 + e[8:] ** 2, 1.0, atol=1e-12)

    def test_injective_on_grid(self):
        grid = np.arange(0.0, 360.0, 0.5)
        codes = np.array([encode_coord(t, normalize=True) for t in grid])
        d = np.linalg.norm(codes[:, None] - codes[None], axis=-1)
        np.fill_diagonal(d, np.inf)
        assert d.min() > 1e-6

    def test_normalize_wraps_degrees(self):
        np.testing.assert_allclose(encode_coord(370.0, normalize=True),
                                   encode_coord(10.0, normalize=True), atol=1e-12)

    def test_sky_concatenates(self):
        np.testing.assert_array_equal(encode_sky(10.0, -5.0),
                                      np.concatenate([encode_coord(10.0), encode_coord(-5.0)]))


class TestTaskRelation:
    @given(st.lists(st.floats(-20, 20), min_size=4, max_size=4))
    def test_row_stochastic(self, raw):
        r = TaskRelation(np.array(raw).reshape(2, 2)).matrix
        assert np.all(r > 0)
        np.testing.assert_allclose(r.sum(axis=1), 1.0, atol=1e-12)

    def test_zeros_is_uniform(self):
        np.testing.assert_allclose(TaskRelation.zeros().matrix, 0.5)

    def test_from_weights_round_trip(self):
        w = np.array([[0.8, 0.2], [0.3, 0.7]])
        np.testing.assert_allclose(TaskRelation.from_weights(w).matrix, w, atol=1e-14)

    def test_relate_is_convex_mix(self):
        w = np.array([[0.8, 0.2], [0.3, 0.7]])
        a, b = np.array([1.0, 2.0]), np.array([3.0, -1.0])
        c, r = relate_tasks(a, b, TaskRelation.from_weights(w))
        np.testing.assert_allclose(c, 0.8 * a + 0.2 * b)
        np.testing.assert_allclose(r, 0.3 * a + 0.7 * b)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            relate_tasks(np.ones(2), np.ones(3), TaskRelation.zeros())
