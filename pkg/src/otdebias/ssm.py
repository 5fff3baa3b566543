"""Selective state-space scan over 8x8 grids with gated directional aggregation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import ParameterError, Rng, ShapeError, as_tensor

TAYLOR_EPS = 1e-6
GRID = 8
DIRECTIONS = ("row", "row_rev", "col", "col_rev")


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


@dataclass
class SSMParams:
    """Diagonal per-channel SSM parameters.

    ``delta_weight``/``delta_bias`` define the selective projection
    delta_t = softplus(x_t @ W + b); when absent every step uses delta = 1.
    ``direction_bias`` holds one D-vector per scan direction.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    taylor_eps: float = TAYLOR_EPS
    delta_weight: np.ndarray | None = None
    delta_bias: np.ndarray | None = None
    direction_bias: np.ndarray | None = None

    def __post_init__(self):
        self.A, self.B, self.C, self.D = (
            np.atleast_1d(as_tensor(v)) for v in (self.A, self.B, self.C, self.D)
        )
        d = self.A.shape[0]
        if any(v.shape != (d,) for v in (self.B, self.C, self.D)):
            raise ShapeError("A, B, C, D must be per-channel vectors of equal length")
        if np.any(self.A > 0):
            raise ParameterError("A must be <= 0 for a stable recurrence")
        if self.taylor_eps <= 0:
            raise ParameterError("taylor_eps must be positive")
        if self.delta_weight is not None:
            self.delta_weight = as_tensor(self.delta_weight, (d, d))
            self.delta_bias = (
                np.zeros(d) if self.delta_bias is None else as_tensor(self.delta_bias, (d,))
            )
        if self.direction_bias is not None:
            self.direction_bias = as_tensor(self.direction_bias, (4, d))

    @property
    def channels(self):
        return self.A.shape[0]

    @classmethod
    def random(cls, d, rng, selective=True):
        """Seeded parameters with A in [-1, 0) and uniform(-1/sqrt(d), 1/sqrt(d)) projections."""
        g = rng.generator
        bound = 1.0 / np.sqrt(d)
        kw = {}
        if selective:
            kw["delta_weight"] = g.uniform(-bound, bound, (d, d))
            kw["delta_bias"] = g.uniform(-bound, bound, d)
        kw["direction_bias"] = g.uniform(-bound, bound, (4, d))
        return cls(
            A=-g.uniform(0.05, 1.0, d),
            B=g.uniform(-1, 1, d),
            C=g.uniform(-1, 1, d),
            D=g.uniform(-1, 1, d),
            **kw,
        )

    def to_dict(self):
        out = {k: getattr(self, k).tolist() for k in "ABCD"}
        out["taylor_eps"] = self.taylor_eps
        for k in ("delta_weight", "delta_bias", "direction_bias"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ScanResult:
    y: np.ndarray
    h_final: np.ndarray
    states: np.ndarray | None = field(default=None, repr=False)


def selective_delta(x_seq, weight=None, bias=None):
    """Step sizes with unit geometric mean per row.

    delta_t = softplus(x_t @ weight + bias), then
    Delta_t = exp(log delta_t - mean(log delta_t)). With ``weight`` omitted the
    input is taken to already be the raw positive delta.
    """
    x_seq = as_tensor(x_seq)
    if weight is None:
        raw = x_seq
        if np.any(raw <= 0):
            raise ParameterError("raw delta values must be positive")
    else:
        z = x_seq @ weight
        if bias is not None:
            z = z + bias
        raw = softplus(z)
    log_d = np.log(raw)
    return np.exp(log_d - log_d.mean(axis=-1, keepdims=True))


def discretize(A, B, delta, eps=TAYLOR_EPS):
    """Zero-order-hold discretisation, elementwise over broadcastable inputs.

    A_bar = exp(dA), B_bar = expm1(dA) / dA * delta * B, where dA = delta * A.
    For |dA| < eps the ratio is replaced by its expansion 1 + dA/2, keeping the
    branch switch continuous to O(eps^2). Returns (A_bar, B_bar).
    """
    A, B, delta = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (A, B, delta)))
    dA = delta * A
    a_bar = np.exp(dA)
    small = np.abs(dA) < eps
    safe = np.where(small, 1.0, dA)
    ratio = np.where(small, 1.0 + 0.5 * dA, np.expm1(safe) / safe)
    b_bar = ratio * delta * B
    if a_bar.ndim == 0:
        return float(a_bar), float(b_bar)
    return a_bar, b_bar


def scan(x_seq, params, delta_seq=None, keep_states=False):
    """Left-to-right recurrence h_t = A_bar h_{t-1} + B_bar x_t, y_t = C h_t + D x_t."""
    x_seq = as_tensor(x_seq)
    if x_seq.ndim == 1:
        x_seq = x_seq[:, None]
    t_len, d = x_seq.shape
    if d != params.channels:
        raise ShapeError(f"sequence has {d} channels, params have {params.channels}")
    if delta_seq is None:
        delta_seq = np.ones_like(x_seq)
    delta_seq = np.asarray(delta_seq, dtype=np.float64).reshape(x_seq.shape[0], -1)
    if delta_seq.shape != x_seq.shape:
        raise ShapeError(f"delta shape {delta_seq.shape} != input shape {x_seq.shape}")
    if np.any(delta_seq <= 0):
        raise ParameterError("delta must be positive")
    a_bar, b_bar = discretize(params.A, params.B, delta_seq, params.taylor_eps)
    u = b_bar * x_seq
    h = np.zeros(d)
    states = np.empty_like(x_seq)
    for t in range(t_len):
        h = a_bar[t] * h + u[t]
        states[t] = h
    y = states * params.C + x_seq * params.D
    return ScanResult(y, h.copy(), states if keep_states else None)


def _orders(n=GRID):
    idx = np.arange(n * n).reshape(n, n)
    return {
        "row": idx.ravel(),
        "row_rev": idx.ravel()[::-1],
        "col": idx.T.ravel(),
        "col_rev": idx.T.ravel()[::-1],
    }


def scan_4dir(grid, params):
    """Scan an (8, 8, D) grid along four raster orders; returns (8, 8, 4D).

    Output channel blocks follow :data:`DIRECTIONS`. Each sequence gets its
    direction bias added before the scan; delta comes from the selective
    projection in ``params`` when present.
    """
    grid = as_tensor(grid)
    if grid.ndim != 3 or grid.shape[:2] != (GRID, GRID):
        raise ShapeError(f"scan_4dir expects an 8x8xD grid, got {grid.shape}")
    d = grid.shape[2]
    flat = grid.reshape(GRID * GRID, d)
    outs = []
    for k, name in enumerate(DIRECTIONS):
        order = _orders()[name]
        seq = flat[order]
        if params.direction_bias is not None:
            seq = seq + params.direction_bias[k]
        delta = None
        if params.delta_weight is not None:
            delta = selective_delta(seq, params.delta_weight, params.delta_bias)
        y = scan(seq, params, delta).y
        back = np.empty_like(y)
        back[order] = y
        outs.append(back.reshape(GRID, GRID, d))
    return np.concatenate(outs, axis=-1)


def init_linear(n_in, n_out, rng):
    bound = 1.0 / np.sqrt(n_in)
    return rng.generator.uniform(-bound, bound, (n_in, n_out))


def gated_aggregate(streams, w_gate, w_content):
    """y = (concat @ Wc) * sigmoid(concat @ Wg) over the last axis."""
    streams = [as_tensor(s) for s in streams]
    if any(s.shape != streams[0].shape for s in streams):
        raise ShapeError("directional streams must share one shape")
    cat = np.concatenate(streams, axis=-1)
    w_gate, w_content = np.asarray(w_gate, float), np.asarray(w_content, float)
    if w_gate.shape[0] != cat.shape[-1] or w_content.shape != w_gate.shape:
        raise ShapeError("gate/content weights must map the concatenated width")
    return (cat @ w_content) * sigmoid(cat @ w_gate)


def residual_fuse(x, y, gate):
    """Convex residual mix gate*y + (1 - gate)*x."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.shape != y.shape:
        raise ShapeError("residual operands must share one shape")
    if not 0.0 <= gate <= 1.0:
        raise ParameterError("gate must lie in [0, 1]")
    return gate * y + (1.0 - gate) * x
