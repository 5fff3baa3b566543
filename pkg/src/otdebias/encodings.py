"""Sinusoidal coordinate encoding and the softmax task-relationship matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .core import ParameterError, ShapeError, as_tensor

DEFAULT_K = 16
OMEGA_MIN = 1.0 / 360.0
OMEGA_MAX = 1.0


def frequencies(k=DEFAULT_K, omega_min=OMEGA_MIN, omega_max=OMEGA_MAX):
    """K log-spaced frequencies from omega_min to omega_max inclusive."""
    if k < 1:
        raise ParameterError("K must be >= 1")
    if not 0 < omega_min <= omega_max:
        raise ParameterError("need 0 < omega_min <= omega_max")
    if k == 1:
        return np.array([float(omega_min)])
    lo, hi = np.log(omega_min), np.log(omega_max)
    return np.exp(lo + np.arange(k) * (hi - lo) / (k - 1))


def encode_coord(theta, k=DEFAULT_K, omega_min=OMEGA_MIN, omega_max=OMEGA_MAX, normalize=False):
    """Encode a scalar coordinate as [sin(2 pi theta w_k) for k] + [cos(...) for k].

    With ``normalize=True`` the coordinate is taken in degrees and wrapped to
    [0, 1) first, i.e. theta / 360 mod 1.
    """
    w = frequencies(k, omega_min, omega_max)
    theta = float(theta)
    if normalize:
        theta = (theta / 360.0) % 1.0
    arg = 2 * np.pi * theta * w
    return np.concatenate([np.sin(arg), np.cos(arg)])


def encode_sky(ra, dec, **kw):
    """RA and Dec encoded independently and concatenated (4K values)."""
    return np.concatenate([encode_coord(ra, **kw), encode_coord(dec, **kw)])


@dataclass(frozen=True)
class TaskRelation:
    raw: np.ndarray

    @property
    def matrix(self):
        return softmax(np.asarray(self.raw, dtype=np.float64), axis=1)

    @classmethod
    def zeros(cls):
        return cls(np.zeros((2, 2)))

    @classmethod
    def from_weights(cls, weights):
        """Raw logits whose row softmax reproduces a row-stochastic ``weights``."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (2, 2) or np.any(w <= 0) or not np.allclose(w.sum(axis=1), 1.0):
            raise ParameterError("weights must be a positive row-stochastic 2x2 matrix")
        return cls(np.log(w))


def relate_tasks(f_cls, f_red, rel):
    """Mix classification and redshift features through the 2x2 relation matrix."""
    f_cls, f_red = as_tensor(f_cls), as_tensor(f_red)
    if f_cls.shape != f_red.shape:
        raise ShapeError("task features must have equal length")
    r = rel.matrix
    return r[0, 0] * f_cls + r[0, 1] * f_red, r[1, 0] * f_cls + r[1, 1] * f_red
