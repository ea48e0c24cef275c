"""Vector arithmetic, tolerances and seeded randomness shared by every module.

Points are plain 1-D ``float64`` numpy arrays. The helpers here validate
shape and finiteness once at the boundary so the numerical code can stay
terse.
"""
from dataclasses import dataclass

import numpy as np

EPS_EQ = 1e-10
EPS_RESIDUAL = 1e-8
MAX_ITER = 100_000


class DimensionError(ValueError):
    """Raised when two points (or a point and a set/operator) disagree in dimension."""


@dataclass(frozen=True)
class ToleranceConfig:
    eps_eq: float = EPS_EQ
    eps_residual: float = EPS_RESIDUAL
    max_iter: int = MAX_ITER

    def __post_init__(self):
        if not (self.eps_eq > 0 and self.eps_residual > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def as_point(x, dim=None):
    """Coerce ``x`` to a finite 1-D float array, optionally checking its dimension."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size == 0:
        raise DimensionError(f"expected a nonempty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p}")
    if dim is not None and p.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {p.size}")
    return p


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def inner_product(x, y) -> float:
    x, y = _check_pair(x, y)
    return float(np.dot(x, y))


def norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def combine(a: float, x, b: float, y) -> np.ndarray:
    """Return ``a*x + b*y``."""
    x, y = _check_pair(x, y)
    return a * x + b * y


def distance(x, y) -> float:
    x, y = _check_pair(x, y)
    return float(np.linalg.norm(x - y))


def points_equal(x, y, eps=EPS_EQ) -> bool:
    return distance(x, y) <= eps


def make_rng(seed=0) -> np.random.Generator:
    """Seeded generator; identical seeds give identical streams."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.default_rng(int(seed))


def sample_pairs(rng, dim, pairs, scale=10.0):
    """Draw ``pairs`` point pairs uniformly from the box ``[-scale, scale]^dim``."""
    xs = rng.uniform(-scale, scale, size=(pairs, dim))
    ys = rng.uniform(-scale, scale, size=(pairs, dim))
    return xs, ys
