"""Histograms, log-domain Sinkhorn and the Hellinger-Kantorovich distance/loss.

The transport part of the HK distance is the debiased entropic cost

    S(p, q) = OT(p, q) - (OT(p, p) + OT(q, q)) / 2,

where OT is the dual value of the entropy-regularised problem. It vanishes
for p == q and its gradient in p is the difference of Sinkhorn potentials,
which is what :func:`hk_loss` differentiates through.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .core import DataError, ParameterError, as_tensor

NORM_TOL = 1e-6
SOFT_FLOOR = 1e-12


@dataclass(frozen=True)
class HKConfig:
    n_bins: int = 40
    z_range: tuple = (0.0, 2.0)
    eps_entropic: float = 0.1
    stop_tol: float = 1e-4
    max_iter: int = 50
    delta: float = 1.0

    def __post_init__(self):
        lo, hi = self.z_range
        if self.n_bins < 2 or not hi > lo:
            raise ParameterError("need n_bins >= 2 and an increasing z_range")
        if min(self.eps_entropic, self.stop_tol, self.max_iter) <= 0 or self.delta < 0:
            raise ParameterError("eps_entropic, stop_tol, max_iter must be positive; delta >= 0")

    def edges(self):
        lo, hi = self.z_range
        return lo + (hi - lo) * np.arange(self.n_bins + 1) / self.n_bins

    @property
    def bin_width(self):
        return (self.z_range[1] - self.z_range[0]) / self.n_bins

    def tight(self, stop_tol=1e-12, max_iter=10_000):
        """Copy with solver tolerances suited to gradient checks."""
        return replace(self, stop_tol=stop_tol, max_iter=max_iter)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray
    clamped: int = 0

    def __post_init__(self):
        edges, mass = np.asarray(self.edges, float), np.asarray(self.mass, float)
        if edges.ndim != 1 or mass.shape != (edges.size - 1,):
            raise DataError("need n+1 edges for n masses")
        if np.any(np.diff(edges) <= 0):
            raise DataError("edges must be strictly increasing")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise DataError("masses must be finite and nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mass", mass)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def n(self):
        return self.mass.size

    def same_binning(self, other):
        return self.edges.shape == other.edges.shape and np.array_equal(self.edges, other.edges)

    @classmethod
    def from_mass(cls, mass, cfg=None, edges=None):
        mass = np.asarray(mass, float)
        if edges is None:
            cfg = cfg or HKConfig(n_bins=mass.size)
            edges = cfg.edges()
        return cls(edges, mass)


@dataclass
class TransportPlan:
    plan: np.ndarray
    cost: np.ndarray
    eps_entropic: float
    iterations_used: int
    marginal_err: float
    transport_cost: float  # <T, C>
    dual_value: float  # <f, a> + <g, b>, the entropic OT value
    f: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    err_history: list = field(default_factory=list, repr=False)

    @property
    def converged(self):
        return bool(self.err_history) and self.marginal_err < self._tol

    _tol: float = field(default=0.0, repr=False)


@dataclass
class HKResult:
    hk2: float
    transport: float
    hellinger: float
    raw_transport: float
    iterations: int
    marginal_err: float

    def as_dict(self):
        return {
            "hk2": self.hk2,
            "transport": self.transport,
            "hellinger": self.hellinger,
            "raw_transport": self.raw_transport,
            "iterations": self.iterations,
            "marginal_err": self.marginal_err,
        }


def histogram(values, cfg=None):
    """Normalised histogram over ``cfg.z_range``; bins are [lo, hi) except the last.

    Out-of-range values are clamped into the end bins and counted in ``clamped``.
    """
    cfg = cfg or HKConfig()
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise DataError("cannot histogram an empty sample")
    if not np.all(np.isfinite(values)):
        raise DataError("values must be finite")
    edges = cfg.edges()
    lo, hi = cfg.z_range
    clamped = int(np.sum((values < lo) | (values > hi)))
    idx = np.searchsorted(edges, values, side="right") - 1
    idx = np.clip(idx, 0, cfg.n_bins - 1)
    counts = np.bincount(idx, minlength=cfg.n_bins).astype(np.float64)
    return Histogram(edges, counts / values.size, clamped)


def squared_cost(x, y=None):
    y = x if y is None else y
    x, y = np.asarray(x, float), np.asarray(y, float)
    return (x[:, None] - y[None, :]) ** 2


def _mass(h):
    return h.mass if isinstance(h, Histogram) else np.asarray(h, dtype=np.float64)


def _check_marginal(m, name):
    if m.ndim != 1 or m.size == 0 or np.any(m < 0) or not np.all(np.isfinite(m)):
        raise DataError(f"{name} must be a nonnegative finite vector")
    if abs(m.sum() - 1.0) > NORM_TOL:
        raise DataError(f"{name} is not normalised (sum={m.sum():.12g})")


def logsumexp(x, axis=None, keepdims=False):
    """Stable log-sum-exp that tolerates all -inf slices (returns -inf there)."""
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return out if keepdims else np.squeeze(out, axis=axis)


def _row_err(f, g, log_a, log_b, neg_c, a, eps):
    log_t = log_a[:, None] + log_b[None, :] + (f[:, None] + g[None, :]) / eps + neg_c
    return float(np.sum(np.abs(np.exp(logsumexp(log_t, axis=1)) - a))), log_t


def sinkhorn(a, b, cost, eps=0.1, stop_tol=1e-4, max_iter=50, anderson=5):
    """Entropic OT between histograms ``a`` and ``b`` by log-domain Sinkhorn.

    Potentials are relative to the product a(x)b: the plan is
    T_ij = a_i b_j exp((f_i + g_j - C_ij) / eps). One iteration is an f update
    followed by a g update, so columns match ``b`` exactly and
    ``marginal_err`` is the L1 row violation.

    With ``anderson`` > 0 each iteration also tries an Anderson-extrapolated
    g (memory ``anderson``) and keeps whichever candidate has the smaller
    error. The plain step alone never increases the L1 error, so the error
    history is non-increasing either way; the fixed point is unchanged.

    Stops below ``stop_tol`` or after ``max_iter`` iterations. An unconverged
    plan is returned with its error recorded rather than raised.
    """
    a, b = _mass(a), _mass(b)
    _check_marginal(a, "a")
    _check_marginal(b, "b")
    cost = np.asarray(cost, dtype=np.float64)
    if cost.shape != (a.size, b.size):
        raise DataError(f"cost shape {cost.shape} does not match marginals")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise DataError("cost must be finite and nonnegative")
    if eps <= 0:
        raise ParameterError("eps must be positive")
    with np.errstate(divide="ignore"):
        log_a, log_b = np.log(a), np.log(b)
    neg_c = -cost / eps

    def f_update(g):
        return -eps * logsumexp(log_b[None, :] + g[None, :] / eps + neg_c, axis=1)

    def g_update(f):
        return -eps * logsumexp(log_a[:, None] + f[:, None] / eps + neg_c, axis=0)

    def step(g):
        # (f + c, g - c) gives the same plan; pinning mean(g) = 0 stops the
        # extrapolation from drifting along that direction
        f_new = f_update(g)
        g_new = g_update(f_new)
        finite = np.isfinite(g_new)
        shift = g_new[finite].mean() if finite.any() else 0.0
        return f_new + shift, g_new - shift

    g = np.zeros(b.size)
    f = np.zeros(a.size)
    xs, rs = [], []
    history = []
    err, log_t = np.inf, None
    it = 0
    while it < max_iter:
        it += 1
        f_new, g_new = step(g)
        e_new, lt_new = _row_err(f_new, g_new, log_a, log_b, neg_c, a, eps)
        if anderson:
            xs.append(g)
            rs.append(g_new - g)
            del xs[: -anderson - 1], rs[: -anderson - 1]
            if len(rs) > 1:
                d_r = np.diff(np.asarray(rs), axis=0).T
                d_x = np.diff(np.asarray(xs), axis=0).T
                gamma = np.linalg.lstsq(d_r, rs[-1], rcond=None)[0]
                g_aa = g + rs[-1] - (d_x + d_r) @ gamma
                if np.all(np.isfinite(g_aa)):
                    f_aa, g_aa = step(g_aa)
                    e_aa, lt_aa = _row_err(f_aa, g_aa, log_a, log_b, neg_c, a, eps)
                    if e_aa < e_new:
                        f_new, g_new, e_new, lt_new = f_aa, g_aa, e_aa, lt_aa
        f, g, err, log_t = f_new, g_new, e_new, lt_new
        history.append(err)
        if err < stop_tol:
            break
    plan = np.exp(log_t)
    return TransportPlan(
        plan=plan,
        cost=cost,
        eps_entropic=eps,
        iterations_used=it,
        marginal_err=err,
        transport_cost=float(np.sum(plan * cost)),
        dual_value=float(f @ a + g @ b),
        f=f,
        g=g,
        err_history=history,
        _tol=stop_tol,
    )


def hellinger_sq(p, q):
    """2 * sum_i (sqrt(p_i) - sqrt(q_i))^2 on a shared binning."""
    if isinstance(p, Histogram) and isinstance(q, Histogram) and not p.same_binning(q):
        raise DataError("histograms use different binnings")
    pm, qm = _mass(p), _mass(q)
    if pm.shape != qm.shape:
        raise DataError("histograms use different binnings")
    return float(2.0 * np.sum((np.sqrt(pm) - np.sqrt(qm)) ** 2))


def _ordered(pm, qm):
    """True when (pm, qm) is already in canonical order; makes S(p,q) bit-symmetric."""
    diff = np.nonzero(pm != qm)[0]
    return diff.size == 0 or pm[diff[0]] < qm[diff[0]]


def _solve(a, b, cost, cfg):
    return sinkhorn(a, b, cost, cfg.eps_entropic, cfg.stop_tol, cfg.max_iter)


@lru_cache(maxsize=256)
def _self_solve(mass_bytes, cost_bytes, cfg):
    m = np.frombuffer(mass_bytes)
    return _solve(m, m, np.frombuffer(cost_bytes).reshape(m.size, m.size), cfg)


def _debiased(pm, qm, cost, cfg):
    """Return (S, raw OT, grad of S wrt p, worst plan) for normalised masses."""
    if _ordered(pm, qm):
        pq = _solve(pm, qm, cost, cfg)
        grad_pq = pq.f
    else:
        pq = _solve(qm, pm, cost, cfg)
        grad_pq = pq.g
    pp = _solve(pm, pm, cost, cfg)
    qq = pp if np.array_equal(pm, qm) else _self_solve(qm.tobytes(), cost.tobytes(), cfg)
    s = pq.dual_value - 0.5 * (pp.dual_value + qq.dual_value)
    grad = grad_pq - 0.5 * (pp.f + pp.g)
    worst = max((pq, pp, qq), key=lambda t: t.marginal_err)
    return s, pq.dual_value, grad, worst, pq


def _sqrt_normalised(m):
    r = np.sqrt(m)
    return r / r.sum()


def hk_distance_sq(p, q, cfg=None, variant="density", debias=True):
    """Squared HK distance: transport between bin centres plus delta * Hellinger.

    ``variant="sqrt"`` transports the renormalised square-root densities
    instead of the densities. ``debias=False`` reports the raw entropic value.
    """
    cfg = cfg or HKConfig(n_bins=_mass(p).size)
    if isinstance(p, Histogram) and isinstance(q, Histogram) and not p.same_binning(q):
        raise DataError("histograms use different binnings")
    pm, qm = _mass(p), _mass(q)
    if pm.shape != qm.shape:
        raise DataError("histograms use different binnings")
    centers = p.centers if isinstance(p, Histogram) else Histogram.from_mass(pm, cfg).centers
    cost = squared_cost(centers)
    hell = hellinger_sq(pm, qm)
    if variant == "sqrt":
        pm, qm = _sqrt_normalised(pm), _sqrt_normalised(qm)
    elif variant != "density":
        raise ParameterError(f"unknown HK variant {variant!r}")
    s, raw, _, worst, pq = _debiased(pm, qm, cost, cfg)
    transport = s if debias else raw
    return HKResult(
        hk2=transport + cfg.delta * hell,
        transport=transport,
        hellinger=hell,
        raw_transport=raw,
        iterations=pq.iterations_used,
        marginal_err=worst.marginal_err,
    )


def hk_value_and_grad(pm, qm, cfg, centers=None):
    """HK^2(p, q) and its gradient with respect to the masses of ``p``.

    ``p`` must be strictly positive (the Hellinger term is not differentiable
    at empty bins).
    """
    pm, qm = np.asarray(pm, float), np.asarray(qm, float)
    if np.any(pm <= 0):
        raise DataError("gradient needs strictly positive masses in p")
    if centers is None:
        centers = Histogram.from_mass(pm, cfg).centers
    cost = squared_cost(centers)
    s, _, grad_s, _, _ = _debiased(pm, qm, cost, cfg)
    hell = hellinger_sq(pm, qm)
    grad_h = 2.0 * (1.0 - np.sqrt(qm / pm))
    return s + cfg.delta * hell, grad_s + cfg.delta * grad_h


def soft_histogram(values, centers, bandwidth, floor=SOFT_FLOOR):
    """Gaussian soft binning; returns (mass, per-sample kernel rows).

    Every sample spreads unit mass over the bins with weights proportional
    to exp(-(z - c_i)^2 / (2 h^2)). A uniform ``floor`` keeps all bins positive.
    """
    z = np.asarray(values, dtype=np.float64).ravel()
    logits = -((z[:, None] - centers[None, :]) ** 2) / (2.0 * bandwidth**2)
    rows = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    n = centers.size
    mass = (rows.mean(axis=0) + floor) / (1.0 + n * floor)
    return mass, rows


def hk_loss(pred_z, target, cfg=None, bandwidth=None):
    """HK^2 between the soft histogram of ``pred_z`` and ``target``, with d loss / d pred_z.

    The gradient is analytic: soft-binning Jacobian times the potential-based
    gradient of the debiased transport term plus the Hellinger derivative.
    Accurate to the solver tolerance in ``cfg``.
    """
    cfg = cfg or HKConfig(n_bins=target.n, z_range=(target.edges[0], target.edges[-1]))
    bw = cfg.bin_width if bandwidth is None else float(bandwidth)
    if bw <= 0:
        raise ParameterError("bandwidth must be positive")
    z = as_tensor(pred_z).ravel()
    if z.size == 0:
        raise DataError("no predictions")
    centers = target.centers
    mass, rows = soft_histogram(z, centers, bw)
    loss, dmass = hk_value_and_grad(mass, target.mass, cfg, centers)
    dmass = dmass / (1.0 + centers.size * SOFT_FLOOR)
    mean_c = rows @ centers
    # d rows_ni / d z_n = rows_ni * (c_i - mean_c_n) / h^2
    grad = (rows * (centers[None, :] - mean_c[:, None])) @ dmass / (bw**2 * z.size)
    return float(loss), grad
