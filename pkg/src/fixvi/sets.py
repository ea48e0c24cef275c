"""Closed convex sets with exact metric projections.

Every descriptor exposes ``dim``, ``project(x)``, ``contains(x)`` and
``to_record()``. Intersections carry a feasibility witness and are projected
with Dykstra's alternating-projection correction, which converges to the
true metric projection rather than just some feasible point.
"""
from dataclasses import dataclass, field

import numpy as np

from .core import EPS_EQ, DimensionError, as_point, make_rng

DEFAULT_MAX_SWEEPS = 10_000


class InfeasibleSetError(ValueError):
    """Intersection without a (valid) feasibility witness."""


class ProjectionNonConvergence(RuntimeError):
    """Dykstra sweeps ran out before the projection was certified."""

    def __init__(self, message, best, violation):
        super().__init__(message)
        self.best = best
        self.violation = violation


class ConvexSet:
    dim: int

    def project(self, x):
        raise NotImplementedError

    def contains(self, x, eps=EPS_EQ):
        raise NotImplementedError

    def to_record(self):
        raise NotImplementedError

    def _pt(self, x):
        return as_point(x, self.dim)


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int

    def project(self, x):
        return self._pt(x).copy()

    def contains(self, x, eps=EPS_EQ):
        self._pt(x)
        return True

    def to_record(self):
        return {"type": "whole", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower)
        hi = as_point(self.upper, lo.size)
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper coordinatewise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self):
        return self.lower.size

    def project(self, x):
        return np.clip(self._pt(x), self.lower, self.upper)

    def contains(self, x, eps=EPS_EQ):
        x = self._pt(x)
        return bool(np.all(x >= self.lower - eps) and np.all(x <= self.upper + eps))

    def to_record(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def project(self, x):
        x = self._pt(x)
        v = x - self.center
        r = np.linalg.norm(v)
        if r <= self.radius:
            return x.copy()
        return self.center + (self.radius / r) * v

    def contains(self, x, eps=EPS_EQ):
        return bool(np.linalg.norm(self._pt(x) - self.center) <= self.radius + eps)

    def to_record(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


def _check_normal(normal):
    n = as_point(normal)
    if np.linalg.norm(n) <= EPS_EQ:
        raise ValueError("normal vector must be nonzero")
    return n


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{y : <normal, y> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", _check_normal(self.normal))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.size

    def project(self, x):
        x = self._pt(x)
        excess = np.dot(self.normal, x) - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / np.dot(self.normal, self.normal)) * self.normal

    def contains(self, x, eps=EPS_EQ):
        x = self._pt(x)
        return bool((np.dot(self.normal, x) - self.offset) / np.linalg.norm(self.normal) <= eps)

    def to_record(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Hyperplane(ConvexSet):
    """``{y : <normal, y> = offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", _check_normal(self.normal))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.size

    def project(self, x):
        x = self._pt(x)
        excess = np.dot(self.normal, x) - self.offset
        return x - (excess / np.dot(self.normal, self.normal)) * self.normal

    def contains(self, x, eps=EPS_EQ):
        x = self._pt(x)
        return bool(abs(np.dot(self.normal, x) - self.offset) / np.linalg.norm(self.normal) <= eps)

    def to_record(self):
        return {"type": "hyperplane", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Simplex(ConvexSet):
    """Scaled probability simplex ``{y >= 0 : sum(y) = scale}``."""

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not self.scale > 0:
            raise ValueError("simplex scale must be positive")
        object.__setattr__(self, "scale", float(self.scale))

    def project(self, x):
        x = self._pt(x)
        # sort-and-threshold: find tau with sum(max(x - tau, 0)) = scale
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - self.scale
        k = np.arange(1, x.size + 1)
        rho = np.nonzero(u - css / k > 0)[0][-1]
        tau = css[rho] / (rho + 1)
        return np.maximum(x - tau, 0.0)

    def contains(self, x, eps=EPS_EQ):
        x = self._pt(x)
        return bool(np.all(x >= -eps) and abs(x.sum() - self.scale) <= eps * max(1.0, self.scale))

    def to_record(self):
        return {"type": "simplex", "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class Intersection(ConvexSet):
    members: tuple
    witness: np.ndarray = None
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    _dim: int = field(init=False, repr=False)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise DimensionError(f"members disagree in dimension: {sorted(dims)}")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_dim", dims.pop())
        if self.witness is not None:
            w = as_point(self.witness, self._dim)
            bad = [i for i, m in enumerate(members) if not m.contains(w)]
            if bad:
                raise InfeasibleSetError(f"witness lies outside members {bad}")
            object.__setattr__(self, "witness", w)

    @property
    def dim(self):
        return self._dim

    def project(self, x):
        return project_intersection(self, x, self.max_sweeps)

    def contains(self, x, eps=EPS_EQ):
        return all(m.contains(x, eps) for m in self.members)

    def to_record(self):
        rec = {"type": "intersection", "members": [m.to_record() for m in self.members]}
        if self.witness is not None:
            rec["witness"] = self.witness.tolist()
        return rec


def project(C: ConvexSet, x):
    return C.project(x)


def contains(C: ConvexSet, x, eps=EPS_EQ) -> bool:
    return C.contains(x, eps)


def project_batch(C: ConvexSet, X):
    """Project each row of ``X``; vectorised for the closed-form sets."""
    X = np.asarray(X, dtype=float)
    if isinstance(C, WholeSpace):
        return X.copy()
    if isinstance(C, Box):
        return np.clip(X, C.lower, C.upper)
    if isinstance(C, Ball):
        V = X - C.center
        r = np.linalg.norm(V, axis=1, keepdims=True)
        scale = np.where(r > C.radius, C.radius / np.maximum(r, 1e-300), 1.0)
        return C.center + scale * V
    if isinstance(C, (Halfspace, Hyperplane)):
        excess = X @ C.normal - C.offset
        if isinstance(C, Halfspace):
            excess = np.maximum(excess, 0.0)
        return X - np.outer(excess / np.dot(C.normal, C.normal), C.normal)
    if isinstance(C, Intersection):
        return _project_intersection_rows(C, X, C.max_sweeps)
    return np.array([C.project(x) for x in X])


def contains_batch(C: ConvexSet, X, eps=EPS_EQ):
    """Membership mask for the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if isinstance(C, WholeSpace):
        return np.ones(len(X), bool)
    if isinstance(C, Box):
        return np.all((X >= C.lower - eps) & (X <= C.upper + eps), axis=1)
    if isinstance(C, Ball):
        return np.linalg.norm(X - C.center, axis=1) <= C.radius + eps
    if isinstance(C, (Halfspace, Hyperplane)):
        excess = (X @ C.normal - C.offset) / np.linalg.norm(C.normal)
        return (excess if isinstance(C, Halfspace) else np.abs(excess)) <= eps
    if isinstance(C, Intersection):
        return np.logical_and.reduce([contains_batch(m, X, eps) for m in C.members])
    return np.array([C.contains(x, eps) for x in X])


def _variational_violation(C, x, y, rng, samples=64):
    """Largest ``<x - y, w - y>`` over feasible ``w`` drawn near ``y``.

    Sampling a neighbourhood of ``y`` is enough: for convex ``C`` the
    inequality at every feasible point follows from the one along segments
    leaving ``y``.
    """
    dirs = rng.standard_normal((samples, C.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    cand = np.vstack([C.witness, y + np.geomspace(1e-3, 1.0, samples)[:, None] * dirs])
    cand = cand[contains_batch(C, cand, eps=0.0)]
    if cand.size == 0:
        return 0.0
    return max(0.0, float(np.max((cand - y) @ (x - y))))


def _dykstra_rows(C: Intersection, X, max_sweeps, eps):
    """Dykstra's algorithm on every row of ``X`` at once.

    Returns ``(Y, done)``; rows stop individually once their corrections and
    iterate have stalled and the variational certificate holds.
    """
    Y = X.copy()
    corr = [np.zeros_like(X) for _ in C.members]
    done = np.zeros(len(X), dtype=bool)
    act = np.arange(len(X))
    for sweep in range(max_sweeps):
        Ya = Y[act]
        Y0 = Ya
        shift = np.zeros(len(act))
        for i, m in enumerate(C.members):
            V = Ya + corr[i][act]
            Z = project_batch(m, V)
            R = V - Z
            D = R - corr[i][act]
            shift += np.einsum("ij,ij->i", D, D)
            corr[i][act] = R
            Ya = Z
        Y[act] = Ya
        scale2 = np.maximum(1.0, np.einsum("ij,ij->i", Ya, Ya))
        step = Ya - Y0
        stalled = (shift <= 1e-28 * scale2) & (np.einsum("ij,ij->i", step, step) <= 1e-28 * scale2)
        for j in np.flatnonzero(stalled):
            r = act[j]
            if C.contains(Y[r], eps) and _variational_violation(C, X[r], Y[r], make_rng(sweep)) <= eps:
                done[r] = True
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
    return Y, done


def project_intersection(C: Intersection, x, max_sweeps=DEFAULT_MAX_SWEEPS, eps=EPS_EQ):
    """Metric projection onto an intersection via Dykstra's algorithm.

    Raises :class:`ProjectionNonConvergence` (carrying the best iterate and
    its variational violation) if ``max_sweeps`` is exhausted.
    """
    x = as_point(x, C.dim)
    return _project_intersection_rows(C, x[None, :], max_sweeps, eps)[0]


def _project_intersection_rows(C: Intersection, X, max_sweeps=DEFAULT_MAX_SWEEPS, eps=EPS_EQ):
    if len(C.members) == 1:
        return project_batch(C.members[0], X)
    if C.witness is None:
        raise InfeasibleSetError("intersection has no feasibility witness")
    Y, done = _dykstra_rows(C, X, max_sweeps, eps)
    if not done.all():
        r = int(np.flatnonzero(~done)[0])
        y = Y[r]
        viol = _variational_violation(C, X[r], y, make_rng(max_sweeps)) if C.contains(y, eps) else float("inf")
        raise ProjectionNonConvergence(
            f"Dykstra did not converge in {max_sweeps} sweeps (violation {viol:.3e})", y, viol
        )
    return Y


def certify_projection(C: ConvexSet, x, y, rng=None, samples=64) -> float:
    """Return the variational-inequality violation ``max <x-y, w-y>`` over sampled ``w`` in C."""
    if rng is None:
        rng = make_rng(0)
    x = as_point(x, C.dim)
    y = as_point(y, C.dim)
    if isinstance(C, Intersection):
        return _variational_violation(C, x, y, rng, samples)
    ws = [C.project(y + r * u) for u, r in zip(
        rng.standard_normal((samples, C.dim)), np.geomspace(1e-3, 10.0, samples))]
    return max(0.0, max(float(np.dot(x - y, w - y)) for w in ws))


def sample_in(C: ConvexSet, rng, n, spread=3.0):
    """Draw ``n`` points of ``C``: convex combinations of projections of random points."""
    rng = make_rng(rng)
    anchor = _anchor(C)
    a = np.array([C.project(anchor + spread * rng.standard_normal(C.dim)) for _ in range(n)])
    b = np.array([C.project(anchor + spread * rng.standard_normal(C.dim)) for _ in range(n)])
    t = rng.uniform(size=(n, 1))
    pts = t * a + (1 - t) * b
    if isinstance(C, (Hyperplane, Simplex)):
        # keep equality constraints tight after blending
        pts = np.array([C.project(p) for p in pts])
    return pts


def _anchor(C):
    if isinstance(C, Ball):
        return C.center
    if isinstance(C, Box):
        return 0.5 * (C.lower + C.upper)
    if isinstance(C, Intersection):
        return C.witness if C.witness is not None else np.zeros(C.dim)
    return np.zeros(C.dim)


def set_from_record(rec) -> ConvexSet:
    """Build a descriptor from a tagged record such as ``{"type": "box", ...}``."""
    kind = rec.get("type")
    if kind == "whole":
        return WholeSpace(int(rec["dim"]))
    if kind == "box":
        return Box(rec["lower"], rec["upper"])
    if kind == "unit_box":
        return Box.unit(int(rec["dim"]))
    if kind == "ball":
        return Ball(rec["center"], rec["radius"])
    if kind == "halfspace":
        return Halfspace(rec["normal"], rec["offset"])
    if kind == "hyperplane":
        return Hyperplane(rec["normal"], rec["offset"])
    if kind == "simplex":
        return Simplex(int(rec["dim"]), rec.get("scale", 1.0))
    if kind == "intersection":
        members = tuple(set_from_record(m) for m in rec["members"])
        return Intersection(members, rec.get("witness"), int(rec.get("max_sweeps", DEFAULT_MAX_SWEEPS)))
    raise ValueError(f"unknown set type {kind!r}")
