"""Dense float64 arrays, seeded randomness and the NDT1 tensor file format.

Tensors are plain ``numpy.ndarray`` objects of dtype float64; the helpers here
enforce the shape and finiteness rules every other module relies on.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"NDT1"


class ShapeError(ValueError):
    """Raised for invalid extents or incompatible tensor shapes."""


class DataError(ValueError):
    """Raised when input values violate a data contract (NaN, empty, unnormalized...)."""


class ParameterError(ValueError):
    """Raised for out-of-domain configuration or scalar parameters."""


def _check_shape(shape):
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if len(shape) == 0 or any(s < 1 for s in shape):
        raise ShapeError(f"all extents must be >= 1, got {shape}")
    return shape


def tensor_new(shape, fill=0.0):
    """Return a float64 tensor of ``shape`` with every element equal to ``fill``."""
    shape = _check_shape(shape)
    if not np.isfinite(fill):
        raise DataError("fill value must be finite")
    return np.full(shape, float(fill), dtype=np.float64)


def as_tensor(values, shape=None):
    """Convert ``values`` to a finite float64 array, optionally reshaping it."""
    arr = np.asarray(values, dtype=np.float64)
    if shape is not None:
        shape = _check_shape(shape)
        if int(np.prod(shape)) != arr.size:
            raise ShapeError(f"cannot view {arr.size} elements as {shape}")
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise DataError("tensor contains NaN or Inf")
    return arr


def flatten_index(index, shape):
    """Row-major offset of a multi-index."""
    return int(np.ravel_multi_index(tuple(index), _check_shape(shape)))


def unflatten_index(offset, shape):
    """Inverse of :func:`flatten_index`."""
    return tuple(int(i) for i in np.unravel_index(offset, _check_shape(shape)))


class Rng:
    """Seeded counter-based generator (Philox) with cheap independent splits.

    Two instances built from the same seed yield the same stream on every
    platform. Instances are not meant to be shared between threads; call
    :meth:`split` to hand each worker its own stream.
    """

    def __init__(self, seed=0, _seed_seq=None):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._seq = _seed_seq if _seed_seq is not None else np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.Philox(self._seq))

    def split(self, n):
        return [Rng(self.seed, _seed_seq=s) for s in self._seq.spawn(n)]

    def normal(self, shape):
        return self._gen.standard_normal(_check_shape(shape))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def dirichlet(self, alpha, size=None):
        return self._gen.dirichlet(alpha, size)

    @property
    def generator(self):
        return self._gen


def normal_sample(rng, shape):
    """I.i.d. standard normal draws of the given shape."""
    return rng.normal(shape)


def write_ndt(path, tensor):
    """Write ``tensor`` as NDT1: magic, u32 LE header length, JSON header, f64 LE payload."""
    arr = np.ascontiguousarray(tensor, dtype="<f8")
    header = json.dumps({"dtype": "f64", "shape": list(arr.shape)}, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(arr.tobytes(order="C"))


def read_ndt(path):
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: not an NDT1 file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    if header.get("dtype") != "f64":
        raise DataError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    shape = _check_shape(header["shape"])
    payload = raw[8 + hlen :]
    if len(payload) != 8 * int(np.prod(shape)):
        raise DataError(f"{path}: payload size does not match shape {shape}")
    return as_tensor(np.frombuffer(payload, dtype="<f8").reshape(shape))
