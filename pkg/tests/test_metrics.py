import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otdebias import catalog, metrics
from otdebias.core import DataError, ParameterError, Rng, ShapeError
from otdebias.transport import HKConfig, histogram


def sample(seed, n=400):
    rng = Rng(seed)
    zt = rng.uniform(0.0, 2.0, n)
    zp = np.clip(zt + 0.15 * rng.normal((n,)), 0.0, None)
    return zt, zp


class TestComputeMetrics:
    def test_closed_form(self):
        zt, zp = np.array([0.5, 1.0]), np.array([0.6, 1.5])
        rep = metrics.compute_metrics(zt, zp)
        ref = np.mean((np.log1p(zp) - np.log1p(zt)) ** 2)
        assert rep.overall["log_mse"] == pytest.approx(ref, rel=1e-14)
        assert rep.overall["bias"] == pytest.approx(0.3)
        assert rep.overall["outlier_rate"] == 0.5

    @settings(max_examples=20)
    @given(st.integers(0, 2**31))
    def test_permutation_invariant(self, seed):
        zt, zp = sample(seed)
        perm = Rng(seed + 1).generator.permutation(zt.size)
        a = metrics.compute_metrics(zt, zp).overall
        b = metrics.compute_metrics(zt[perm], zp[perm]).overall
        for k in a:
            assert a[k] == pytest.approx(b[k], rel=1e-12, abs=1e-15)

    @settings(max_examples=20)
    @given(st.integers(0, 2**31))
    def test_split_weighted_average(self, seed):
        zt, zp = sample(seed)
        whole = metrics.compute_metrics(zt, zp).overall["log_mse"]
        h1 = metrics.compute_metrics(zt[:150], zp[:150]).overall["log_mse"]
        h2 = metrics.compute_metrics(zt[150:], zp[150:]).overall["log_mse"]
        assert whole == pytest.approx((150 * h1 + 250 * h2) / 400, abs=1e-12)

    @given(st.integers(0, 2**31), st.floats(0.01, 0.5), st.floats(0.0, 0.5))
    def test_outlier_rate_monotone_in_threshold(self, seed, t, dt):
        zt, zp = sample(seed, 100)
        lo = metrics.compute_metrics(zt, zp, t).overall["outlier_rate"]
        hi = metrics.compute_metrics(zt, zp, t + dt).overall["outlier_rate"]
        assert hi <= lo

    def test_per_bin_counts_and_empty_bins(self):
        rep = metrics.compute_metrics([0.1, 0.6, 2.0], [0.1, 0.6, 2.0])
        assert [b["n"] for b in rep.per_bin.values()] == [1, 1, 0, 1]
        assert rep.per_bin["1.0-1.5"]["log_mse"] is None

    def test_out_of_range_filtered(self):
        rep = metrics.compute_metrics([0.5, 2.5], [0.5, 2.5])
        assert rep.n_samples == 1
        assert rep.n_filtered == 1

    def test_errors(self):
        with pytest.raises(ShapeError):
            metrics.compute_metrics([0.1], [0.1, 0.2])
        with pytest.raises(DataError):
            metrics.compute_metrics([], [])
        with pytest.raises(DataError):
            metrics.compute_metrics([0.1], [-1.0])


class TestScalars:
    def test_relative_improvement(self):
        assert metrics.relative_improvement(0.023460, 0.018072) == pytest.approx(22.9667, abs=1e-4)
        with pytest.raises(ParameterError):
            metrics.relative_improvement(0.0, 1.0)

    def test_cv_population(self):
        v = [75.19, 81.72, 82.42, 80.93]
        assert metrics.coefficient_of_variation(v) == pytest.approx(
            100 * np.std(v) / np.mean(v), rel=1e-14)

    @given(st.lists(st.floats(0.1, 100), min_size=2, max_size=10), st.floats(0.1, 10))
    def test_cv_scale_invariant(self, v, s):
        assert metrics.coefficient_of_variation(np.array(v) * s) == pytest.approx(
            metrics.coefficient_of_variation(v), rel=1e-9, abs=1e-9)

    def test_accuracy(self):
        assert metrics.accuracy([0, 1, 1, 2], [0, 1, 2, 2]) == 75.0

    def test_z_norm(self):
        assert metrics.z_norm(np.e - 1) == pytest.approx(1.0)
        with pytest.raises(DataError):
            metrics.z_norm(-1.0)


class TestCatalog:
    def write(self, tmp_path, text):
        path = tmp_path / "c.csv"
        path.write_text(text)
        return path

    def test_round_trip(self, tmp_path):
        rows = [catalog.CatalogRow("a", 0.5, 0.6, 0.9, 1, 1),
                catalog.CatalogRow("b", 1.25, None, 0.4, None, None)]
        path = tmp_path / "c.csv"
        catalog.write_catalog(rows, path)
        assert catalog.parse_catalog(path).rows == rows

    def test_malformed_rows_collected_or_raised(self, tmp_path):
        path = self.write(tmp_path, "id,z_true,z_pred\na,0.5,0.4\nb,xx,0.3\nc,0.2\n")
        parsed = catalog.parse_catalog(path)
        assert [r.id for r in parsed.rows] == ["a"]
        assert [e[0] for e in parsed.errors] == [3, 4]
        with pytest.raises(DataError):
            catalog.parse_catalog(path, strict=True)

    def test_out_of_range_is_filtered(self, tmp_path):
        path = self.write(tmp_path, "id,z_true\na,0.5\nb,2.4\n")
        parsed = catalog.parse_catalog(path)
        assert parsed.filtered == [(3, "b", "out-of-range")]

    def test_missing_mandatory_column(self, tmp_path):
        with pytest.raises(catalog.SchemaError):
            catalog.parse_catalog(self.write(tmp_path, "id,z_pred\na,0.5\n"))

    def test_schema_mapping(self, tmp_path):
        path = self.write(tmp_path, "name,zspec\na,0.5\n")
        parsed = catalog.parse_catalog(path, schema={"id": "name", "z_true": "zspec"})
        assert parsed.rows[0].z_true == 0.5

    def test_histogram_round_trip(self, tmp_path):
        h = histogram(Rng(1).uniform(0, 2, 500), HKConfig())
        path = tmp_path / "h.csv"
        path.write_text(catalog.histogram_to_csv(h))
        back = catalog.read_histogram(path)
        np.testing.assert_array_equal(back.edges, h.edges)
        np.testing.assert_array_equal(back.mass, h.mass)

    def test_histogram_bad_header(self, tmp_path):
        with pytest.raises(catalog.SchemaError):
            catalog.read_histogram(self.write(tmp_path, "a,b,c\n1,2,3\n"))
