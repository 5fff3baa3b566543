"""Synthetic selection-bias simulator, HK recalibration and the loss-mode ablation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, softmax

from .catalog import CatalogRow
from .core import DataError, ParameterError, Rng
from .losses import color_weights
from .metrics import compute_metrics
from .transport import HKConfig, Histogram, hk_loss, hk_value_and_grad, histogram

MODES = ("mse-only", "+color", "+hk", "+color+hk")
MIN_ACCEPTANCE = 1e-3


class DegenerateSelectionError(DataError):
    pass


@dataclass(frozen=True)
class Component:
    weight: float
    z_mean: float
    z_std: float
    c0: float
    c_slope: float
    c_std: float


def default_mixture():
    """Blue star-forming plus red-sequence population in (z, g-r)."""
    return (
        Component(0.55, 0.55, 0.30, 0.35, 0.35, 0.08),
        Component(0.45, 0.90, 0.35, 0.75, 0.30, 0.06),
    )


def sample_true(mixture, n, rng, z_range=(0.0, 2.0)):
    """Draw n (z, color) pairs; z is truncated to ``z_range`` by resampling."""
    g = rng.generator
    w = np.array([c.weight for c in mixture], dtype=float)
    comp = g.choice(len(mixture), size=n, p=w / w.sum())
    z = np.empty(n)
    col = np.empty(n)
    for k, c in enumerate(mixture):
        idx = np.nonzero(comp == k)[0]
        draws = np.empty(0)
        while draws.size < idx.size:
            d = g.normal(c.z_mean, c.z_std, 2 * (idx.size - draws.size) + 8)
            draws = np.concatenate([draws, d[(d >= z_range[0]) & (d <= z_range[1])]])
        z[idx] = draws[: idx.size]
        col[idx] = c.c0 + c.c_slope * z[idx] + g.normal(0.0, c.c_std, idx.size)
    return z, col


@dataclass(frozen=True)
class SelectionFn:
    """S(z, c) in [0, 1].

    kinds: ``none`` (S = 1), ``logistic`` (1 / (1 + exp(k (z - z0)))),
    ``color`` (1 above ``c_cut``, ``floor`` below), ``product`` (logistic
    times color) and ``step`` (1 for z < z_cut, ``floor`` otherwise; the one
    kind allowed to reach 0).
    """

    kind: str = "none"
    params: dict = field(default_factory=dict)

    DEFAULTS = {
        "none": {},
        "logistic": {"z0": 0.8, "k": 6.0},
        "color": {"c_cut": 0.7, "floor": 0.4},
        "product": {"z0": 0.8, "k": 6.0, "c_cut": 0.7, "floor": 0.4},
        "step": {"z_cut": 1.0, "floor": 0.0},
    }

    def __post_init__(self):
        if self.kind not in self.DEFAULTS:
            raise ParameterError(f"unknown selection kind {self.kind!r}")
        merged = dict(self.DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ParameterError(f"unknown parameter(s) {sorted(unknown)} for {self.kind}")
        merged.update({k: float(v) for k, v in self.params.items()})
        if "floor" in merged and not 0.0 <= merged["floor"] <= 1.0:
            raise ParameterError("floor must lie in [0, 1]")
        if self.kind in ("color", "product") and merged["floor"] <= 0:
            raise ParameterError("color gate floor must be positive")
        object.__setattr__(self, "params", merged)

    @classmethod
    def parse(cls, text):
        """``"logistic:z0=0.8,k=6"`` -> SelectionFn."""
        kind, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise ParameterError(f"bad selection parameter {item!r}") from None
        return cls(kind.strip(), params)

    def __call__(self, z, c=None):
        z = np.asarray(z, dtype=np.float64)
        p = self.params
        if self.kind == "none":
            return np.ones_like(z)
        if self.kind == "step":
            return np.where(z < p["z_cut"], 1.0, p["floor"])
        out = np.ones_like(z)
        if self.kind in ("logistic", "product"):
            out = out * expit(-p["k"] * (z - p["z0"]))
        if self.kind in ("color", "product"):
            if c is None:
                raise DataError("color-gated selection needs colors")
            out = out * np.where(np.asarray(c) >= p["c_cut"], 1.0, p["floor"])
        return out


@dataclass
class SyntheticCatalog:
    rows: list
    true_dist: Histogram
    observed_dist: Histogram
    seed: int
    population_z: np.ndarray = field(repr=False)
    population_c: np.ndarray = field(repr=False)
    accepted_index: np.ndarray = field(repr=False)

    @property
    def z(self):
        return np.array([r.z_true for r in self.rows])

    @property
    def colors(self):
        return np.array([r.g_r for r in self.rows])

    @property
    def acceptance(self):
        return len(self.rows) / self.population_z.size


def sample_catalog(selection, n, rng, mixture=None, cfg=None):
    """Rejection-sample ``n`` observed galaxies from the true mixture under ``selection``.

    Every candidate is kept in the population record; the accepted ones form
    the observed catalog. Raises :class:`DegenerateSelectionError` when the
    acceptance rate falls below 1e-3.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    mixture = mixture or default_mixture()
    cfg = cfg or HKConfig()
    zs, cs, acc = [], [], []
    n_acc, drawn = 0, 0
    batch = max(1024, n)
    while n_acc < n:
        z, c = sample_true(mixture, batch, rng, cfg.z_range)
        keep = rng.generator.uniform(size=batch) < selection(z, c)
        zs.append(z)
        cs.append(c)
        acc.append(keep)
        n_acc += int(keep.sum())
        drawn += batch
        if drawn >= 4 * batch and n_acc / drawn < MIN_ACCEPTANCE:
            raise DegenerateSelectionError(f"acceptance rate {n_acc / drawn:.2e} below 1e-3")
    z, c, keep = np.concatenate(zs), np.concatenate(cs), np.concatenate(acc)
    # trim the population right after the n-th acceptance
    last = int(np.nonzero(keep)[0][n - 1]) + 1
    return _assemble(z[:last], c[:last], keep[:last], cfg, rng.seed)


def _assemble(z, c, keep, cfg, seed):
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        raise DegenerateSelectionError("no accepted rows")
    rows = [CatalogRow(f"g{i:06d}", float(z[i]), None, float(c[i])) for i in idx]
    return SyntheticCatalog(rows, histogram(z, cfg), histogram(z[idx], cfg), seed, z, c, idx)


def ks_statistic(p, q):
    """Max CDF difference between two histograms on one binning."""
    return float(np.max(np.abs(np.cumsum(p.mass) - np.cumsum(q.mass))))


@dataclass
class RecalibrationResult:
    histogram: Histogram
    loss_trace: list
    steps: int
    failed: bool


def hk_recalibrate(observed, target, cfg=None, steps=500, lr=0.05, floor=1e-12, patience=10,
                  max_log_step=1.0, on_step=None):
    """Descend HK^2(., target) over the simplex, starting from ``observed``.

    The histogram is softmax(theta). Each step moves theta by ``-lr * g``
    where g is the gradient with respect to the masses (a multiplicative
    weights update), clipped to ``max_log_step`` per bin so that bins far
    below their target cannot overshoot. Logits are kept within log(floor)
    of the maximum so every mass stays positive. ``failed`` is set when the
    loss rises ``patience`` times in a row. ``on_step(step, mass, loss)`` is
    called after every update.
    """
    cfg = cfg or HKConfig(n_bins=observed.n, z_range=(observed.edges[0], observed.edges[-1]))
    if not observed.same_binning(target):
        raise DataError("observed and target histograms use different binnings")
    if steps < 0 or lr <= 0:
        raise ParameterError("steps must be >= 0 and lr > 0")
    if np.array_equal(observed.mass, target.mass):
        return RecalibrationResult(observed, [0.0], 0, False)
    n = observed.n
    log_floor = np.log(floor)
    p = (observed.mass + floor) / (1.0 + n * floor)
    theta = np.log(p)
    loss, grad = hk_value_and_grad(p, target.mass, cfg, observed.centers)
    trace = [loss]
    rises = 0
    failed = False
    step = 0
    for step in range(1, steps + 1):
        theta = theta - np.clip(lr * grad, -max_log_step, max_log_step)
        theta = np.maximum(theta - theta.max(), log_floor)
        p = softmax(theta)
        loss, grad = hk_value_and_grad(p, target.mass, cfg, observed.centers)
        rises = rises + 1 if loss > trace[-1] + 1e-12 else 0
        trace.append(loss)
        if on_step is not None:
            on_step(step, p, loss)
        if rises >= patience:
            failed = True
            break
    return RecalibrationResult(Histogram(observed.edges, p), trace, step, failed)


class IsotonicBinRegressor:
    """Piecewise-constant, non-decreasing map from color to redshift.

    Colors are split at training quantiles; the bin levels in log(1+z) are
    u_0 + cumsum(softplus(theta)), monotone by construction.
    """

    def __init__(self, n_bins=12):
        self.n_bins = n_bins
        self.cuts = None
        self.params = None

    def bins(self, colors):
        return np.searchsorted(self.cuts, np.asarray(colors, float), side="right")

    def levels(self, params=None):
        p = self.params if params is None else params
        return p[0] + np.concatenate([[0.0], np.cumsum(np.logaddexp(0.0, p[1:]))])

    def predict(self, colors, params=None):
        return np.expm1(self.levels(params)[self.bins(colors)])

    def fit(self, colors, z, weights=None, hk_target=None, hk_weight=0.0, cfg=None):
        colors, z = np.asarray(colors, float), np.asarray(z, float)
        if colors.size == 0 or not np.all(np.isfinite(colors)):
            raise DataError("training colors must be present and finite")
        qs = np.linspace(0, 1, self.n_bins + 1)[1:-1]
        self.cuts = np.quantile(colors, qs)
        idx = self.bins(colors)
        w = np.ones_like(z) if weights is None else np.asarray(weights, float)
        wsum = w.sum()
        target_u = np.log1p(z)
        use_hk = hk_target is not None and hk_weight > 0
        cfg = cfg or HKConfig().tight(1e-10, 2000)

        def objective(params):
            u = self.levels(params)
            r = u[idx] - target_u
            val = float(np.sum(w * r**2) / wsum)
            d_u = np.bincount(idx, weights=2 * w * r / wsum, minlength=self.n_bins)
            if use_hk:
                zhat = np.expm1(u[idx])
                hval, hgrad = hk_loss(zhat, hk_target, cfg)
                val += hk_weight * hval
                d_u += hk_weight * np.bincount(idx, weights=hgrad * (1 + zhat), minlength=self.n_bins)
            # chain through u_k = p0 + sum_{j<=k} softplus(p_j)
            grad = np.empty_like(params)
            grad[0] = d_u.sum()
            tail = np.cumsum(d_u[::-1])[::-1][1:]
            grad[1:] = tail * expit(params[1:])
            return val, grad

        init = np.concatenate([[np.log1p(np.quantile(z, 0.5 / self.n_bins))], np.full(self.n_bins - 1, -2.0)])
        res = minimize(objective, init, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "gtol": 1e-10, "ftol": 1e-14})
        self.params = res.x
        return self


@dataclass
class AblationResult:
    reports: dict  # mode -> MetricsReport
    predictions: dict  # mode -> np.ndarray on the evaluation sample
    eval_z: np.ndarray

    def as_dict(self):
        """One column per mode, mirroring the four-configuration comparison."""
        modes = list(self.reports)
        labels = list(self.reports[modes[0]].per_bin)
        return {
            "modes": modes,
            "n_eval": int(self.eval_z.size),
            "overall": {m: self.reports[m].overall for m in modes},
            "per_bin": {lb: {m: self.reports[m].per_bin[lb] for m in modes} for lb in labels},
        }

    def to_csv(self):
        """``scope,metric,<mode>...`` rows; empty cells where a bin has no rows."""
        modes = list(self.reports)
        lines = [",".join(["scope", "metric", *modes])]
        for key in ("log_mse", "bias", "outlier_rate"):
            vals = [repr(self.reports[m].overall[key]) for m in modes]
            lines.append(",".join(["overall", key, *vals]))
        for lb in self.reports[modes[0]].per_bin:
            for key in ("log_mse", "bias"):
                vals = [self.reports[m].per_bin[lb][key] for m in modes]
                lines.append(",".join([lb, key, *("" if v is None else repr(v) for v in vals)]))
        return "\n".join(lines) + "\n"


def ablation_run(catalog, modes=MODES, hk_weight=1e-3, n_bins=12, cfg=None, bands=None, threads=1):
    """Fit one weak color -> z regressor per loss mode on the accepted rows
    and score each on the whole candidate population (the pre-selection draw).

    The HK target is the population histogram. Modes are independent and run
    on up to ``threads`` workers; results do not depend on the thread count.
    """
    if any(r.g_r is None for r in catalog.rows):
        raise DataError("catalog rows need a g_r color column")
    for mode in modes:
        if mode not in MODES:
            raise ParameterError(f"unknown ablation mode {mode!r}")
    colors, z = catalog.colors, catalog.z
    w = color_weights(colors, bands)
    eval_z, eval_c = catalog.population_z, catalog.population_c

    def fit(mode):
        reg = IsotonicBinRegressor(n_bins).fit(
            colors,
            z,
            weights=w if "color" in mode else None,
            hk_target=catalog.true_dist if "hk" in mode else None,
            hk_weight=hk_weight,
            cfg=cfg,
        )
        return np.clip(reg.predict(eval_c), 0.0, None)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fitted = list(pool.map(fit, modes))
    else:
        fitted = [fit(m) for m in modes]
    preds = dict(zip(modes, fitted))
    reports = {m: compute_metrics(eval_z, preds[m]) for m in modes}
    return AblationResult(reports, preds, eval_z)


def paired_bootstrap(z_true, pred_a, pred_b, n_boot=1000, rng=None):
    """95% interval of Log-MSE(b) - Log-MSE(a) under paired resampling of rows."""
    rng = rng or Rng(0)
    zt = np.log1p(np.asarray(z_true, float))
    ea = (np.log1p(pred_a) - zt) ** 2
    eb = (np.log1p(pred_b) - zt) ** 2
    d = eb - ea
    idx = rng.generator.integers(0, d.size, (n_boot, d.size))
    stats = d[idx].mean(axis=1)
    return float(np.percentile(stats, 2.5)), float(np.percentile(stats, 97.5))


def bootstrap_std(z_true, pred, n_boot=1000, rng=None):
    rng = rng or Rng(0)
    e = (np.log1p(pred) - np.log1p(np.asarray(z_true, float))) ** 2
    idx = rng.generator.integers(0, e.size, (n_boot, e.size))
    return float(e[idx].mean(axis=1).std())


def synthetic_to_csv(catalog):
    """Every candidate draw as ``id,z_true,g_r,selected``; accepted rows have selected=1."""
    sel = np.zeros(catalog.population_z.size, dtype=int)
    sel[catalog.accepted_index] = 1
    lines = ["id,z_true,g_r,selected"]
    for i, (z, c, s) in enumerate(zip(catalog.population_z, catalog.population_c, sel)):
        lines.append(f"g{i:06d},{float(z)!r},{float(c)!r},{s}")
    return "\n".join(lines) + "\n"


def read_synthetic(path, cfg=None):
    """Rebuild a :class:`SyntheticCatalog` from :func:`synthetic_to_csv` output.

    Files without a ``selected`` column are treated as fully selected, which
    is the S = 1 control.
    """
    import csv

    cfg = cfg or HKConfig()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"z_true", "g_r"} <= set(reader.fieldnames):
            raise DataError(f"{path}: catalog needs z_true and g_r columns")
        z, c, s = [], [], []
        for line_no, rec in enumerate(reader, start=2):
            try:
                z.append(float(rec["z_true"]))
                c.append(float(rec["g_r"]))
                s.append(int(rec.get("selected") or 1))
            except (TypeError, ValueError):
                raise DataError(f"{path}:{line_no}: malformed row") from None
    if not z:
        raise DataError(f"{path}: empty catalog")
    z, c, s = np.array(z), np.array(c), np.array(s, dtype=bool)
    return _assemble(z, c, s, cfg, seed=None)
