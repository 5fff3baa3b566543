import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otdebias import biaslab
from otdebias.core import DataError, ParameterError, Rng
from otdebias.transport import HKConfig, Histogram, hk_distance_sq

CFG = HKConfig()


@pytest.fixture(scope="module")
def logistic_catalog():
    return biaslab.sample_catalog(biaslab.SelectionFn.parse("logistic"), 3000, Rng(7), cfg=CFG)


@pytest.fixture(scope="module")
def control_catalog():
    return biaslab.sample_catalog(biaslab.SelectionFn.parse("none"), 3000, Rng(7), cfg=CFG)


class TestSelection:
    def test_parse(self):
        sel = biaslab.SelectionFn.parse("logistic:z0=1.0,k=3")
        assert sel.params == {"z0": 1.0, "k": 3.0}
        assert sel(np.array([1.0]))[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("text", ["blob", "logistic:q=1", "logistic:k=abc", "color:floor=0"])
    def test_bad_specs(self, text):
        with pytest.raises(ParameterError):
            biaslab.SelectionFn.parse(text)

    @given(st.sampled_from(["none", "logistic", "color", "product", "step"]),
           st.lists(st.floats(0, 2), min_size=1, max_size=20))
    def test_range(self, kind, z):
        s = biaslab.SelectionFn.parse(kind)(np.array(z), np.array(z) * 0.6)
        assert np.all((s >= 0) & (s <= 1))
        if kind != "step":
            assert np.all(s > 0)

    def test_color_needs_colors(self):
        with pytest.raises(DataError):
            biaslab.SelectionFn.parse("color")(np.array([0.5]))


class TestSampling:
    def test_deterministic(self):
        sel = biaslab.SelectionFn.parse("product")
        a = biaslab.sample_catalog(sel, 500, Rng(3))
        b = biaslab.sample_catalog(sel, 500, Rng(3))
        assert a.rows == b.rows
        np.testing.assert_array_equal(a.population_z, b.population_z)

    def test_counts_and_ranges(self, logistic_catalog):
        cat = logistic_catalog
        assert len(cat.rows) == 3000
        assert cat.accepted_index[-1] == cat.population_z.size - 1
        assert np.all((cat.population_z >= 0) & (cat.population_z <= 2))
        assert cat.true_dist.mass.sum() == pytest.approx(1.0)
        assert 0 < cat.acceptance < 1

    def test_degenerate_selection(self):
        with pytest.raises(biaslab.DegenerateSelectionError):
            biaslab.sample_catalog(biaslab.SelectionFn.parse("logistic:z0=-3,k=40"), 100, Rng(0))

    def test_step_removes_high_z(self):
        cat = biaslab.sample_catalog(biaslab.SelectionFn.parse("step"), 1000, Rng(1))
        assert cat.observed_dist.mass[cat.observed_dist.centers > 1.0].sum() == 0.0

    def test_bias_signal(self, logistic_catalog, control_catalog):
        ks_bias = biaslab.ks_statistic(logistic_catalog.observed_dist, logistic_catalog.true_dist)
        ks_ctrl = biaslab.ks_statistic(control_catalog.observed_dist, control_catalog.true_dist)
        assert ks_ctrl == 0.0
        assert ks_bias > 0.1

    def test_csv_round_trip(self, tmp_path, logistic_catalog):
        path = tmp_path / "syn.csv"
        path.write_text(biaslab.synthetic_to_csv(logistic_catalog))
        back = biaslab.read_synthetic(path, CFG)
        np.testing.assert_array_equal(back.z, logistic_catalog.z)
        np.testing.assert_array_equal(back.population_c, logistic_catalog.population_c)
        np.testing.assert_array_equal(back.observed_dist.mass, logistic_catalog.observed_dist.mass)

    def test_missing_selected_column_is_control(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("id,z_true,g_r\na,0.5,0.7\nb,1.5,1.0\n")
        assert len(biaslab.read_synthetic(path).rows) == 2

    def test_missing_color_column(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("id,z_true\na,0.5\n")
        with pytest.raises(DataError):
            biaslab.read_synthetic(path)


class TestRecalibrate:
    def test_simplex_at_every_step_and_recovery(self, logistic_catalog):
        cat = logistic_catalog
        seen = []

        def check(step, mass, loss):
            assert np.all(mass >= 0)
            assert mass.sum() == pytest.approx(1.0, abs=1e-12)
            seen.append(step)

        res = biaslab.hk_recalibrate(cat.observed_dist, cat.true_dist, CFG, steps=200, on_step=check)
        assert seen
        before = hk_distance_sq(cat.observed_dist, cat.true_dist, CFG).hk2
        after = hk_distance_sq(res.histogram, cat.true_dist, CFG).hk2
        assert after <= 0.5 * before
        assert not res.failed

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31))
    def test_random_pairs_stay_on_simplex(self, seed):
        rng = Rng(seed)
        obs = Histogram.from_mass(rng.dirichlet(np.ones(40)), CFG)
        tgt = Histogram.from_mass(rng.dirichlet(np.ones(40)), CFG)
        res = biaslab.hk_recalibrate(obs, tgt, CFG, steps=30)
        assert res.histogram.mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert res.loss_trace[-1] <= res.loss_trace[0]

    def test_equal_inputs_return_immediately(self):
        h = Histogram.from_mass(np.full(40, 1 / 40), CFG)
        res = biaslab.hk_recalibrate(h, h, CFG)
        np.testing.assert_array_equal(res.histogram.mass, h.mass)


class TestRegressor:
    def test_monotone_levels(self):
        rng = Rng(2)
        c = rng.uniform(0, 1.5, 500)
        z = np.clip(c + 0.2 * rng.normal((500,)), 0, 2)
        reg = biaslab.IsotonicBinRegressor(8).fit(c, z)
        assert np.all(np.diff(reg.levels()) >= 0)
        grid = np.linspace(0, 1.5, 50)
        assert np.all(np.diff(reg.predict(grid)) >= 0)

    def test_nonfinite_colors(self):
        with pytest.raises(DataError):
            biaslab.IsotonicBinRegressor().fit(np.array([np.nan, 0.5]), np.array([0.1, 0.2]))


@pytest.fixture(scope="module")
def small():
    return biaslab.sample_catalog(biaslab.SelectionFn.parse("logistic"), 800, Rng(11), cfg=CFG)


class TestAblation:
    def test_thread_count_does_not_change_results(self, small):
        a = biaslab.ablation_run(small, threads=1)
        b = biaslab.ablation_run(small, threads=4)
        assert a.to_csv() == b.to_csv()
        assert list(a.as_dict()["overall"]) == list(biaslab.MODES)

    def test_missing_color_rejected(self, small):
        rows = [dataclasses.replace(r, g_r=None) for r in small.rows]
        with pytest.raises(DataError):
            biaslab.ablation_run(dataclasses.replace(small, rows=rows))

    def test_unknown_mode(self, small):
        with pytest.raises(ParameterError):
            biaslab.ablation_run(small, modes=("mse-only", "magic"))

    def test_bootstrap_of_identical_predictions(self):
        z = Rng(0).uniform(0, 2, 100)
        assert biaslab.paired_bootstrap(z, z + 0.1, z + 0.1) == (0.0, 0.0)

    def test_bootstrap_detects_real_gap(self):
        z = Rng(0).uniform(0, 2, 500)
        lo, hi = biaslab.paired_bootstrap(z, z + 0.01, z + 0.3)
        assert lo > 0
