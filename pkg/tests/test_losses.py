import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otdebias import losses
from otdebias.core import DataError, ParameterError, Rng


def softmax(z):
    e = np.exp(z - z.max())
    return e / e.sum()


def central_fd(fn, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return out


logits = st.lists(st.floats(-4, 4), min_size=2, max_size=8).map(np.array)


class TestFocal:
    @settings(max_examples=50)
    @given(logits, st.floats(0.0, 4.0), st.data())
    def test_gradient_matches_fd(self, z, gamma, data):
        label = data.draw(st.integers(0, z.size - 1))
        res = losses.focal_loss(softmax(z), label, gamma=gamma)
        fd = central_fd(lambda x: losses.focal_loss(softmax(x), label, gamma=gamma).value, z)
        np.testing.assert_allclose(res.grad, fd, atol=1e-7, rtol=1e-5)

    @given(logits, st.data())
    def test_gamma_zero_is_cross_entropy(self, z, data):
        label = data.draw(st.integers(0, z.size - 1))
        p = softmax(z)
        assert losses.focal_loss(p, label, gamma=0.0).value == pytest.approx(
            -math.log(p[label]), abs=1e-12)

    def test_literal_sums_all_classes(self):
        p = np.array([0.2, 0.3, 0.5])
        lit = losses.focal_loss(p, 0, gamma=2.0, literal=True).value
        ref = -sum((1 - q) ** 2 * math.log(q) for q in p)
        assert lit == pytest.approx(ref, rel=1e-14)

    def test_clamp_warns(self):
        with pytest.warns(RuntimeWarning):
            res = losses.focal_loss(np.array([1.0, 0.0]), 1)
        assert res.clamped
        assert res.value == pytest.approx(-math.log(1e-12))

    def test_not_a_distribution(self):
        with pytest.raises(DataError):
            losses.focal_loss(np.array([0.5, 0.6]), 0)


class TestAdaptiveGamma:
    @given(st.floats(0, 1e6), st.floats(1e-6, 1e6), st.floats(0, 5), st.floats(0, 3))
    def test_bounds(self, cur, base, gamma0, eta):
        g = losses.adaptive_gamma(cur, base, gamma0, eta)
        assert gamma0 - eta - 1e-12 <= g <= gamma0 + eta + 1e-12

    def test_equal_losses_keep_gamma0(self):
        assert losses.adaptive_gamma(0.7, 0.7) == 2.0

    def test_bad_baseline(self):
        with pytest.raises(ParameterError):
            losses.adaptive_gamma(1.0, 0.0)


class TestColorWeights:
    @pytest.mark.parametrize("g_r,w", [(0.9, 1.0), (0.6, 1.0), (1.2, 1.0), (0.3, 0.7), (0.59, 0.7),
                                       (1.3, 0.7), (1.5, 0.7), (0.1, 0.3), (1.6, 0.3)])
    def test_tiers(self, g_r, w):
        assert losses.color_weight(g_r) == w

    def test_missing_color(self):
        with pytest.raises(DataError):
            losses.color_weight(float("nan"))


class TestRedshiftAndVIB:
    @settings(max_examples=30)
    @given(st.integers(0, 2**31))
    def test_redshift_gradient(self, seed):
        rng = Rng(seed)
        zp, zt = rng.uniform(0, 2, 7), rng.uniform(0, 2, 7)
        res = losses.redshift_loss(zp, zt)
        np.testing.assert_allclose(
            res.grad, central_fd(lambda x: losses.redshift_loss(x, zt).value, zp), rtol=1e-6, atol=1e-9)

    def test_redshift_zero_at_truth(self):
        assert losses.redshift_loss([0.3, 1.1], [0.3, 1.1]).value == 0.0

    @settings(max_examples=30)
    @given(st.integers(0, 2**31))
    def test_kl_gradient_and_nonnegative(self, seed):
        rng = Rng(seed)
        mu, sigma = rng.normal((5,)), rng.uniform(0.2, 2.0, 5)
        kl, dmu, dsig = losses.vib_kl(losses.VIBState(mu, sigma))
        assert kl >= 0
        fd = central_fd(lambda x: losses.vib_kl(losses.VIBState(x[:5], x[5:]))[0],
                        np.concatenate([mu, sigma]))
        np.testing.assert_allclose(np.concatenate([dmu, dsig]), fd, rtol=1e-6, atol=1e-9)

    def test_kl_zero_at_prior(self):
        assert losses.vib_kl(losses.VIBState(np.zeros(3), np.ones(3)))[0] == 0.0

    def test_reparameterize_moments(self):
        state = losses.VIBState(np.full(200_000, 1.5), np.full(200_000, 0.5))
        s = losses.reparameterize(state, Rng(1))
        assert s.mean() == pytest.approx(1.5, abs=0.01)
        assert s.std() == pytest.approx(0.5, abs=0.01)

    @given(st.floats(1e-3, 10), st.floats(-5, 5))
    def test_lsi_gradient(self, kl, c_raw):
        _, dkl, dc = losses.lsi_term(kl, c_raw)
        fd = central_fd(lambda x: losses.lsi_term(x[0], x[1])[0], [kl, c_raw], h=1e-7)
        np.testing.assert_allclose([dkl, dc], fd, rtol=1e-5)

    def test_lsi_at_zero(self):
        assert losses.lsi_term(0.0) == (0.0, 0.0, 0.0)


class TestTotalLoss:
    parts = {"L_cls": 1.0, "L_red": 0.5, "kl": 0.4, "L_hk": 0.2}

    def test_composition(self):
        cfg = losses.LossConfig(hk_start_epoch=0, ramp_epochs=0)
        lsi = losses.lsi_term(0.4)[0]
        ref = 1.0 + 0.5 * 0.5 + (0.25 * 0.4 + 0.12 * lsi) + 0.035 * 0.2
        assert losses.total_loss(self.parts, cfg, epoch=3) == pytest.approx(ref, rel=1e-14)

    @given(st.sampled_from(["L_cls", "L_red", "kl", "L_hk"]), st.floats(0.0, 5.0))
    def test_monotone_in_each_part(self, key, bump):
        hi = dict(self.parts, **{key: self.parts[key] + bump})
        assert losses.total_loss(hi, epoch=20) >= losses.total_loss(self.parts, epoch=20)

    def test_hk_off_in_eval_and_before_start(self):
        assert losses.total_loss(self.parts, epoch=20, training=False) == \
            losses.total_loss(dict(self.parts, L_hk=0.0), epoch=20)
        assert losses.hk_curriculum(1) == 0.0

    def test_curriculum_ramp_and_step(self):
        cfg = losses.LossConfig()
        assert losses.hk_curriculum(2, cfg) == 0.0
        assert losses.hk_curriculum(7, cfg) == pytest.approx(0.035 / 2)
        assert losses.hk_curriculum(50, cfg) == 0.035
        assert losses.hk_curriculum(2, losses.LossConfig(curriculum="step")) == 0.035

    def test_breakdown_sums_to_total(self):
        b = losses.loss_breakdown(self.parts, epoch=20)
        assert b["cls"] + b["red"] + b["vib"] + b["lsi"] + b["hk"] == pytest.approx(b["total"])

    def test_nonfinite_part(self):
        with pytest.raises(DataError):
            losses.total_loss(dict(self.parts, L_red=float("inf")))


class TestSchedule:
    def lr(self, t):
        return losses.uba_lr(losses.ScheduleState(t=t))

    def test_key_points(self):
        assert self.lr(0) == 1e-4
        assert self.lr(10) == 1e-3
        end = 5e-6 + 0.5 * (1e-3 - 5e-6) * (1 + math.cos(0.7 * math.pi))
        assert self.lr(120) == pytest.approx(end, rel=1e-14)

    def test_warmup_increasing_then_non_increasing(self):
        vals = np.array([self.lr(t) for t in np.linspace(0, 120, 1201)])
        t = np.linspace(0, 120, 1201)
        assert np.all(np.diff(vals[t <= 10]) > 0)
        assert np.all(np.diff(vals[t >= 10]) <= 0)
        assert vals.max() == 1e-3

    def test_bounds(self):
        vals = [self.lr(t) for t in range(121)]
        assert min(vals) >= 5e-6
        assert max(vals) <= 1e-3

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            self.lr(121)
        with pytest.raises(ParameterError):
            losses.ScheduleState(t_w=130)
