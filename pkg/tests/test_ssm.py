import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otdebias import ssm
from otdebias.core import ParameterError, Rng, ShapeError


def unrolled(x, p, delta):
    a_bar, b_bar = ssm.discretize(p.A, p.B, delta, p.taylor_eps)
    y = np.empty_like(x)
    for t in range(x.shape[0]):
        acc = np.zeros(x.shape[1])
        for s in range(t + 1):
            acc += np.prod(a_bar[s + 1 : t + 1], axis=0) * b_bar[s] * x[s]
        y[t] = p.C * acc + p.D * x[t]
    return y


class TestDiscretize:
    def test_closed_form(self):
        a, b = ssm.discretize(-0.5, 2.0, 0.3)
        assert a == pytest.approx(np.exp(-0.15), rel=1e-15)
        assert b == pytest.approx(np.expm1(-0.15) / -0.15 * 0.3 * 2.0, rel=1e-15)

    @given(st.floats(1e-9, 5.0), st.floats(-3.0, -1e-9))
    def test_zero_order_hold_identity(self, delta, a):
        # b_bar = (exp(dA) - 1) / A * B for B = 1
        _, b = ssm.discretize(a, 1.0, delta)
        assert b == pytest.approx(np.expm1(delta * a) / a, rel=1e-9)

    def test_continuous_across_taylor_switch(self):
        eps = ssm.TAYLOR_EPS
        lo = ssm.discretize(-1.0, 1.0, eps * (1 - 1e-9))[1]
        hi = ssm.discretize(-1.0, 1.0, eps * (1 + 1e-9))[1]
        assert abs(hi - lo) < 1e-10

    def test_zero_a_gives_delta_b(self):
        a, b = ssm.discretize(0.0, 3.0, 0.2)
        assert a == 1.0
        assert b == pytest.approx(0.6)


class TestScan:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 40), st.integers(1, 6), st.integers(0, 2**31))
    def test_matches_unrolled(self, t_len, d, seed):
        rng = Rng(seed)
        p = ssm.SSMParams.random(d, rng, selective=False)
        x = rng.normal((t_len, d))
        delta = rng.uniform(0.01, 2.0, (t_len, d))
        np.testing.assert_allclose(ssm.scan(x, p, delta).y, unrolled(x, p, delta), atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31))
    def test_stability_bound(self, seed):
        rng = Rng(seed)
        p = ssm.SSMParams.random(4, rng, selective=False)
        x = rng.uniform(-1, 1, (200, 4))
        delta = rng.uniform(0.05, 1.5, (200, 4))
        states = ssm.scan(x, p, delta, keep_states=True).states
        a_bar, b_bar = ssm.discretize(p.A, p.B, delta)
        bound = np.abs(x).max() * np.abs(b_bar).max() / (1 - a_bar.max())
        assert np.abs(states).max() <= bound * (1 + 1e-12)

    def test_final_state_is_last_state(self):
        rng = Rng(1)
        p = ssm.SSMParams.random(3, rng)
        res = ssm.scan(rng.normal((10, 3)), p, keep_states=True)
        np.testing.assert_array_equal(res.h_final, res.states[-1])

    def test_channel_mismatch(self):
        p = ssm.SSMParams.random(3, Rng(0))
        with pytest.raises(ShapeError):
            ssm.scan(np.ones((5, 2)), p)

    def test_nonpositive_delta(self):
        p = ssm.SSMParams.random(2, Rng(0))
        with pytest.raises(ParameterError):
            ssm.scan(np.ones((3, 2)), p, np.zeros((3, 2)))

    def test_positive_a_rejected(self):
        with pytest.raises(ParameterError):
            ssm.SSMParams(A=[0.1], B=[1], C=[1], D=[0])

    def test_params_round_trip(self, tmp_path):
        import json

        p = ssm.SSMParams.random(3, Rng(2))
        path = tmp_path / "p.json"
        path.write_text(json.dumps(p.to_dict()))
        q = ssm.SSMParams.load(path)
        for k in ("A", "B", "C", "D", "delta_weight", "delta_bias", "direction_bias"):
            np.testing.assert_array_equal(getattr(p, k), getattr(q, k))


class TestScan4Dir:
    def test_shape_and_direction_blocks(self):
        rng = Rng(4)
        p = dataclasses.replace(ssm.SSMParams.random(3, rng, selective=False), direction_bias=None)
        grid = rng.normal((8, 8, 3))
        out = ssm.scan_4dir(grid, p)
        assert out.shape == (8, 8, 12)
        row = ssm.scan(grid.reshape(64, 3), p).y.reshape(8, 8, 3)
        np.testing.assert_allclose(out[..., :3], row, atol=1e-14)
        col = ssm.scan(grid.transpose(1, 0, 2).reshape(64, 3), p).y.reshape(8, 8, 3)
        np.testing.assert_allclose(out[..., 6:9], col.transpose(1, 0, 2), atol=1e-14)

    def test_reverse_direction_is_flip(self):
        rng = Rng(5)
        p = dataclasses.replace(ssm.SSMParams.random(2, rng, selective=False), direction_bias=None)
        grid = rng.normal((8, 8, 2))
        out = ssm.scan_4dir(grid, p)
        flipped = ssm.scan_4dir(grid[::-1, ::-1], p)
        np.testing.assert_allclose(out[..., 2:4], flipped[::-1, ::-1, 0:2], atol=1e-14)

    def test_wrong_grid(self):
        with pytest.raises(ShapeError):
            ssm.scan_4dir(np.ones((4, 8, 2)), ssm.SSMParams.random(2, Rng(0)))


class TestAggregation:
    def test_gate_bounds(self):
        rng = Rng(6)
        streams = [rng.normal((8, 8, 2)) for _ in range(4)]
        w_g, w_c = ssm.init_linear(8, 3, rng), ssm.init_linear(8, 3, rng)
        y = ssm.gated_aggregate(streams, w_g, w_c)
        cat = np.concatenate(streams, axis=-1) @ w_c
        assert y.shape == (8, 8, 3)
        assert np.all(np.abs(y) <= np.abs(cat) + 1e-15)

    @given(st.floats(0.0, 1.0))
    def test_residual_is_convex(self, gate):
        x, y = np.array([0.0, 2.0]), np.array([1.0, -2.0])
        out = ssm.residual_fuse(x, y, gate)
        assert np.all(out >= np.minimum(x, y) - 1e-15)
        assert np.all(out <= np.maximum(x, y) + 1e-15)

    def test_residual_gate_range(self):
        with pytest.raises(ParameterError):
            ssm.residual_fuse(np.ones(2), np.ones(2), 1.5)
