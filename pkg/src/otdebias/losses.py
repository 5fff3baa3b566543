"""Multi-task loss terms with analytic gradients, the LR schedule and HK curriculum."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import DataError, ParameterError, as_tensor

PROB_FLOOR = 1e-12


class LossGrad(NamedTuple):
    value: float
    grad: np.ndarray


class FocalResult(NamedTuple):
    value: float
    grad: np.ndarray  # d loss / d logits
    clamped: bool


def softplus(x):
    return float(np.logaddexp(0.0, x))


def _sigmoid(x):
    return 0.5 * (1.0 + math.tanh(0.5 * x))


@dataclass(frozen=True)
class ColorBands:
    """g-r bands for the three quality tiers; intervals are left-closed."""

    high: tuple = (0.6, 1.2)
    medium_lo: tuple = (0.3, 0.6)
    medium_hi: tuple = (1.2, 1.5)


@dataclass(frozen=True)
class LossConfig:
    lambda_red: float = 0.5
    lambda_vib: float = 0.25
    lsi_weight: float = 0.12
    lambda_hk: float = 0.035
    hk_start_epoch: int = 2
    ramp_epochs: int = 10
    curriculum: str = "ramp"  # or "step"
    gamma0: float = 2.0
    gamma_eta: float = 1.0
    alpha: tuple | None = None
    c_raw: float = 0.0
    bands: ColorBands = field(default_factory=ColorBands)

    def __post_init__(self):
        lams = (self.lambda_red, self.lambda_vib, self.lsi_weight, self.lambda_hk)
        if min(lams) < 0 or self.hk_start_epoch < 0 or self.ramp_epochs < 0:
            raise ParameterError("loss weights and epoch gates must be nonnegative")
        if self.curriculum not in ("ramp", "step"):
            raise ParameterError(f"unknown curriculum {self.curriculum!r}")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "bands" in data:
            data["bands"] = ColorBands(**{k: tuple(v) for k, v in data["bands"].items()})
        if data.get("alpha") is not None:
            data["alpha"] = tuple(data["alpha"])
        return cls(**data)


@dataclass(frozen=True)
class ScheduleState:
    t: float = 0
    t_w: float = 10
    T: float = 120
    eta_min: float = 5e-6
    eta_max: float = 1e-3
    eta_init: float = 1e-4
    phi: float = 0.70

    def __post_init__(self):
        if not self.t_w < self.T:
            raise ParameterError("warmup must end before the schedule does")
        if not self.eta_min < self.eta_init <= self.eta_max:
            raise ParameterError("need eta_min < eta_init <= eta_max")


@dataclass(frozen=True)
class VIBState:
    mu: np.ndarray
    sigma: np.ndarray
    c_raw: float = 0.0

    @property
    def c(self):
        return softplus(self.c_raw)


def focal_loss(probs, label, alpha=None, gamma=2.0, literal=False):
    """Focal loss and its gradient with respect to the logits behind ``probs``.

    Default form: -alpha_y (1 - p_y)^gamma log p_y. ``literal=True`` sums that
    expression over every class instead of only the true one.
    """
    p = as_tensor(probs).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DataError("probs must be a probability vector")
    alpha = np.ones_like(p) if alpha is None else np.asarray(alpha, dtype=np.float64)
    clamped = bool(np.any(p[[label]] < PROB_FLOOR) if not literal else np.any(p < PROB_FLOOR))
    if clamped:
        warnings.warn("probability clamped at 1e-12 in focal loss", RuntimeWarning, stacklevel=2)
    pc = np.maximum(p, PROB_FLOOR)
    one_m = 1.0 - pc
    # d/dp of -a (1-p)^g log p; the gamma term vanishes at gamma == 0 or p == 1
    with np.errstate(divide="ignore", invalid="ignore"):
        pow_gm1 = np.where(one_m > 0, one_m ** (gamma - 1.0), 0.0) if gamma != 0 else 0.0
    dterm = -alpha * (-gamma * pow_gm1 * np.log(pc) + one_m**gamma / pc)
    dterm = np.where(p < PROB_FLOOR, 0.0, dterm)
    terms = -alpha * one_m**gamma * np.log(pc)
    if literal:
        value, gp = float(terms.sum()), dterm
    else:
        value = float(terms[label])
        gp = np.zeros_like(p)
        gp[label] = dterm[label]
    # softmax Jacobian: d p_i / d z_k = p_i (delta_ik - p_k)
    grad = p * (gp - gp @ p)
    return FocalResult(value, grad, clamped)


def adaptive_gamma(l_current, l_baseline, gamma0=2.0, eta=1.0):
    if l_baseline <= 0:
        raise ParameterError("baseline loss must be positive")
    return gamma0 + eta * math.tanh((l_current - l_baseline) / l_baseline)


def color_weight(g_r, bands=None):
    """Quality-tier weight 1.0 / 0.7 / 0.3 for a g-r color."""
    bands = bands or ColorBands()
    if g_r is None or not np.isfinite(g_r):
        raise DataError("color must be finite")
    # a color on a threshold takes the higher-weight tier
    lo, hi = bands.high
    if lo <= g_r <= hi:
        return 1.0
    if bands.medium_lo[0] <= g_r < bands.medium_lo[1] or bands.medium_hi[0] < g_r <= bands.medium_hi[1]:
        return 0.7
    return 0.3


def color_weights(colors, bands=None):
    return np.array([color_weight(float(c), bands) for c in np.ravel(colors)])


def redshift_loss(z_pred, z_true, weights=None):
    """Weighted squared log(1+z) residuals, summed; gradient w.r.t. ``z_pred``."""
    zp, zt = np.asarray(z_pred, float).ravel(), np.asarray(z_true, float).ravel()
    if zp.shape != zt.shape:
        raise DataError("prediction and target lengths differ")
    if np.any(1.0 + zp <= 0) or np.any(1.0 + zt <= 0):
        raise DataError("redshifts must exceed -1")
    w = np.ones_like(zp) if weights is None else np.asarray(weights, float).ravel()
    r = np.log1p(zp) - np.log1p(zt)
    return LossGrad(float(np.sum(w * r**2)), 2.0 * w * r / (1.0 + zp))


def vib_kl(state):
    """KL(N(mu, sigma^2) || N(0, I)); returns (kl, d/dmu, d/dsigma)."""
    mu, sigma = np.asarray(state.mu, float), np.asarray(state.sigma, float)
    if np.any(sigma <= 0):
        raise ParameterError("sigma must be positive")
    kl = 0.5 * float(np.sum(mu**2 + sigma**2 - 1.0 - 2.0 * np.log(sigma)))
    return kl, mu.copy(), sigma - 1.0 / sigma


def reparameterize(state, rng):
    mu, sigma = np.asarray(state.mu, float), np.asarray(state.sigma, float)
    if np.any(sigma < 0):
        raise ParameterError("sigma must be nonnegative")
    return mu + sigma * rng.normal(mu.shape)


def lsi_term(kl, c_raw=0.0):
    """sqrt(softplus(c_raw) * kl); returns (value, d/dkl, d/dc_raw).

    Both derivatives are taken as 0 at kl == 0.
    """
    if kl < 0:
        raise ParameterError("KL must be nonnegative")
    c = softplus(c_raw)
    value = math.sqrt(c * kl)
    if value == 0.0:
        return 0.0, 0.0, 0.0
    return value, c / (2.0 * value), kl * _sigmoid(c_raw) / (2.0 * value)


def hk_curriculum(epoch, cfg=None):
    """lambda_HK for ``epoch``: off before hk_start_epoch, then ramp or step."""
    cfg = cfg or LossConfig()
    if epoch < 0:
        raise ParameterError("epoch must be nonnegative")
    if epoch < cfg.hk_start_epoch:
        return 0.0
    if cfg.curriculum == "step" or cfg.ramp_epochs == 0:
        return cfg.lambda_hk
    frac = min(1.0, (epoch - cfg.hk_start_epoch) / cfg.ramp_epochs)
    return cfg.lambda_hk * frac


def total_loss(parts, cfg=None, epoch=0, training=True):
    """L_cls + l_red L_red + (l_vib KL + w_lsi LSI) + l_hk(epoch) L_hk.

    ``parts`` needs ``L_cls``, ``L_red`` and ``kl``; ``lsi`` is derived from
    ``kl`` and ``cfg.c_raw`` when absent, and ``L_hk`` defaults to 0. The HK
    term is dropped when ``training`` is False.
    """
    cfg = cfg or LossConfig()
    kl = float(parts.get("kl", 0.0))
    lsi = parts.get("lsi")
    if lsi is None:
        lsi = lsi_term(kl, cfg.c_raw)[0]
    lam_hk = hk_curriculum(epoch, cfg) if training else 0.0
    vals = (parts.get("L_cls", 0.0), parts.get("L_red", 0.0), kl, lsi, parts.get("L_hk", 0.0))
    if not all(np.isfinite(v) for v in vals):
        raise DataError("loss parts must be finite")
    return (
        float(parts.get("L_cls", 0.0))
        + cfg.lambda_red * float(parts.get("L_red", 0.0))
        + (cfg.lambda_vib * kl + cfg.lsi_weight * float(lsi))
        + lam_hk * float(parts.get("L_hk", 0.0))
    )


def loss_breakdown(parts, cfg=None, epoch=0, training=True):
    """Per-term contributions to :func:`total_loss` (stable key order)."""
    cfg = cfg or LossConfig()
    kl = float(parts.get("kl", 0.0))
    lsi = parts.get("lsi")
    if lsi is None:
        lsi = lsi_term(kl, cfg.c_raw)[0]
    lam_hk = hk_curriculum(epoch, cfg) if training else 0.0
    out = {
        "cls": float(parts.get("L_cls", 0.0)),
        "red": cfg.lambda_red * float(parts.get("L_red", 0.0)),
        "vib": cfg.lambda_vib * kl,
        "lsi": cfg.lsi_weight * float(lsi),
        "hk": lam_hk * float(parts.get("L_hk", 0.0)),
        "lambda_hk": lam_hk,
    }
    out["total"] = total_loss(parts, cfg, epoch, training)
    return out


def uba_lr(state):
    """Linear warmup eta_init -> eta_max over [0, t_w], then cosine annealing
    towards eta_min whose phase only reaches phi * pi at t = T."""
    t = state.t
    if t < 0 or t > state.T:
        raise ParameterError(f"t={t} outside [0, {state.T}]")
    if t < state.t_w:
        return state.eta_init + (state.eta_max - state.eta_init) * t / state.t_w
    prog = (t - state.t_w) / (state.T - state.t_w)
    return state.eta_min + 0.5 * (state.eta_max - state.eta_min) * (
        1.0 + math.cos(prog * math.pi * state.phi)
    )
