"""Wasserstein distances between point clouds.

In one dimension optimal transport between equal-mass empiricals has a closed
form over sorted order statistics; that is the exact oracle. For d > 1 a
sliced estimator projects both clouds onto L shared random unit directions and
aggregates the 1D distances. Directions come from the versioned deterministic
generator, so equal configs give bit-identical results on any machine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError, ValueRangeError
from .rng import Stream, derive_seed
from .spectra import PointCloud

ORDERS = (1, 2)


@dataclass(frozen=True)
class SwdConfig:
    """Sliced-distance settings: projection count L, direction seed, order p."""

    num_projections: int = 64
    seed: int = 0
    order: int = 2

    def __post_init__(self):
        if self.num_projections < 1:
            raise ConfigurationError(f"num_projections must be >= 1, got {self.num_projections}")
        if self.order not in ORDERS:
            raise ConfigurationError(f"order must be one of {ORDERS}, got {self.order}")


def _as_values(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    arr = np.asarray(cloud, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"expected (n, d) points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueRangeError("points contain non-finite values")
    return arr


def presorted_w1d(a_sorted: np.ndarray, b_sorted: np.ndarray, order: int) -> np.ndarray:
    """1D distances column-wise over already-sorted samples."""
    gaps = np.abs(a_sorted - b_sorted)
    if order == 1:
        return gaps.mean(axis=0)
    return np.sqrt(np.mean(gaps * gaps, axis=0))


def exact_w1d(a, b, order: int = 2) -> float:
    """Exact 1D Wasserstein distance between equal-size multisets of reals.

    ((1/n) sum_k |a_(k) - b_(k)|^p)^(1/p) over sorted order statistics.
    """
    if order not in ORDERS:
        raise ConfigurationError(f"order must be one of {ORDERS}, got {order}")
    av = _as_values(a).ravel()
    bv = _as_values(b).ravel()
    if av.size != bv.size:
        raise ShapeError(f"sample counts differ: {av.size} vs {bv.size}")
    if av.size == 0:
        raise ShapeError("empty multiset")
    return float(presorted_w1d(np.sort(av)[:, None], np.sort(bv)[:, None], order)[0])


def unit_directions(dim: int, cfg: SwdConfig) -> np.ndarray:
    """L unit vectors on the (d-1)-sphere, a pure function of (dim, cfg.seed)."""
    if dim < 1:
        raise ShapeError(f"direction dimension must be >= 1, got {dim}")
    stream = Stream(derive_seed(cfg.seed, f"swd-directions/dim{dim}"))
    raw = stream.normals(cfg.num_projections * dim).reshape(cfg.num_projections, dim)
    norms = np.sqrt((raw * raw).sum(axis=1, keepdims=True))
    # a zero draw has vanishing probability but a defined fallback: e_1
    degenerate = norms[:, 0] == 0.0
    if degenerate.any():
        raw[degenerate] = 0.0
        raw[degenerate, 0] = 1.0
        norms[degenerate] = 1.0
    return raw / norms


def project_sorted(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Projections of (n, d) points onto each direction, sorted per column -> (n, L)."""
    return np.sort(points @ directions.T, axis=0)


def swd_from_projections(a_sorted: np.ndarray, b_sorted: np.ndarray, order: int) -> float:
    """Aggregate per-direction 1D distances: ((1/L) sum_l w_l^p)^(1/p)."""
    per_direction = presorted_w1d(a_sorted, b_sorted, order)
    if order == 1:
        return float(per_direction.mean())
    return float(np.sqrt(np.mean(per_direction * per_direction)))


def sliced_wd(a, b, cfg: SwdConfig) -> float:
    """Sliced Wasserstein distance between two equal-size clouds of equal dimension.

    For 1-d clouds projection is skipped and the exact closed form is returned.
    """
    if isinstance(a, PointCloud) and isinstance(b, PointCloud) and a.kind != b.kind:
        raise ConfigurationError(f"cloud kinds differ: {a.kind!r} vs {b.kind!r}")
    av = _as_values(a)
    bv = _as_values(b)
    if av.shape[1] != bv.shape[1]:
        raise ShapeError(f"cloud dimensions differ: {av.shape[1]} vs {bv.shape[1]}")
    if av.shape[0] != bv.shape[0]:
        raise ShapeError(f"sample counts differ: {av.shape[0]} vs {bv.shape[0]}")
    if av.shape[1] == 1:
        return exact_w1d(av, bv, cfg.order)
    directions = unit_directions(av.shape[1], cfg)
    return swd_from_projections(
        project_sorted(av, directions), project_sorted(bv, directions), cfg.order
    )
