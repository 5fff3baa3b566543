"""Photo-z evaluation metrics: Log-MSE, bias, outlier rate and per-bin breakdown."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DataError, ParameterError, ShapeError

Z_BINS = ((0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0))
OUTLIER_THRESH = 0.15


def bin_label(lo, hi):
    return f"{lo:.1f}-{hi:.1f}"


def z_norm(z):
    """log(1 + z), elementwise."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= -1):
        raise DataError("redshift must exceed -1")
    out = np.log1p(z)
    return float(out) if out.ndim == 0 else out


@dataclass
class MetricsReport:
    overall: dict
    per_bin: dict
    n_samples: int
    n_filtered: int = 0
    outlier_thresh: float = OUTLIER_THRESH
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "n_samples": self.n_samples,
            "n_filtered": self.n_filtered,
            "outlier_thresh": self.outlier_thresh,
            "overall": self.overall,
            "per_bin": self.per_bin,
        }
        out.update(self.extra)
        return out


def _stats(zp, zt, thresh):
    resid = np.log1p(zp) - np.log1p(zt)
    return {
        "log_mse": float(np.mean(resid**2)),
        "bias": float(np.mean(zp - zt)),
        "outlier_rate": float(np.mean(np.abs(zp - zt) / (1.0 + zt) > thresh)),
    }


def compute_metrics(z_true, z_pred, outlier_thresh=OUTLIER_THRESH, z_range=(0.0, 2.0)):
    """Overall and per-true-redshift-bin metrics.

    Rows whose true z falls outside ``z_range`` are excluded and counted in
    ``n_filtered``. Bins are [lo, hi) except the last, which is closed.
    """
    zt = np.asarray(z_true, dtype=np.float64).ravel()
    zp = np.asarray(z_pred, dtype=np.float64).ravel()
    if zt.shape != zp.shape:
        raise ShapeError("z_true and z_pred differ in length")
    if zt.size == 0:
        raise DataError("no rows to evaluate")
    if np.any(zp <= -1) or np.any(zt <= -1) or not np.all(np.isfinite(zp)):
        raise DataError("redshifts must be finite and exceed -1")
    keep = (zt >= z_range[0]) & (zt <= z_range[1])
    n_filtered = int(np.sum(~keep))
    zt, zp = zt[keep], zp[keep]
    if zt.size == 0:
        raise DataError("every row was outside the redshift range")
    per_bin = {}
    for k, (lo, hi) in enumerate(Z_BINS):
        last = k == len(Z_BINS) - 1
        sel = (zt >= lo) & ((zt <= hi) if last else (zt < hi))
        n = int(sel.sum())
        if n:
            st = _stats(zp[sel], zt[sel], outlier_thresh)
            per_bin[bin_label(lo, hi)] = {"log_mse": st["log_mse"], "bias": st["bias"], "n": n}
        else:
            per_bin[bin_label(lo, hi)] = {"log_mse": None, "bias": None, "n": 0}
    return MetricsReport(_stats(zp, zt, outlier_thresh), per_bin, int(zt.size), n_filtered,
                         outlier_thresh)


def metrics_from_rows(rows, outlier_thresh=OUTLIER_THRESH):
    rows = [r for r in rows if r.z_pred is not None]
    if not rows:
        raise DataError("no rows with predictions")
    return compute_metrics([r.z_true for r in rows], [r.z_pred for r in rows], outlier_thresh)


def relative_improvement(baseline, treated):
    """Percent reduction of ``treated`` relative to ``baseline``."""
    if baseline == 0:
        raise ParameterError("baseline must be nonzero")
    return 100.0 * (baseline - treated) / baseline


def coefficient_of_variation(values):
    """100 * population std / mean."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ParameterError("need at least two values")
    mean = v.mean()
    if mean == 0:
        raise ParameterError("mean is zero")
    return float(100.0 * v.std(ddof=0) / mean)


def accuracy(pred_labels, true_labels):
    p, t = np.asarray(pred_labels), np.asarray(true_labels)
    if p.shape != t.shape:
        raise ShapeError("label lists differ in length")
    if p.size == 0:
        raise DataError("no labels")
    return float(100.0 * np.mean(p == t))
