"""Histogram optimal transport, directional wavelet features and selection-bias tooling
for photometric redshift experiments."""

from .core import DataError, ParameterError, Rng, ShapeError, as_tensor, read_ndt, tensor_new, write_ndt
from .transport import HKConfig, Histogram, hk_distance_sq, hk_loss, histogram, sinkhorn

__all__ = [
    "DataError",
    "HKConfig",
    "Histogram",
    "ParameterError",
    "Rng",
    "ShapeError",
    "as_tensor",
    "histogram",
    "hk_distance_sq",
    "hk_loss",
    "read_ndt",
    "sinkhorn",
    "tensor_new",
    "write_ndt",
]

__version__ = "0.1.0"
