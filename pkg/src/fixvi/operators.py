"""Inverse strongly monotone operators, nonexpansive mappings and the W-mapping.

Two families of objects live here:

* ``PointMapping`` subclasses -- the self-maps ``T`` whose fixed points we
  want (identity, constants, scalings about a centre, projections, linear
  maps, averaged compositions);
* ``IsmOperator`` subclasses -- the operator ``A`` of the variational
  inequality, each carrying a certified inverse-strong-monotonicity constant
  ``alpha`` and a Lipschitz constant.

``WMapping`` combines a (possibly infinite) family ``T_1, T_2, ...`` with
weights ``mu_k`` through the backward recursion

    U_{n,n+1} = I,   U_{n,k} = mu_k T_k U_{n,k+1} + (1 - mu_k) I,   W_n = U_{n,1}.

Certifications are by seeded sampling; they verify, they do not prove.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .core import EPS_EQ, DimensionError, as_point, make_rng, sample_pairs
from .sets import ConvexSet, project_batch, set_from_record

DEFAULT_PAIRS = 10_000
DEFAULT_DEPTH_CAP = 64
DEFAULT_MU = 0.5
SAMPLE_SCALE = 10.0


class CertificationError(ValueError):
    """A sampled certificate failed; ``pair`` holds the witnessing points when known."""

    def __init__(self, message, pair=None, member=None):
        super().__init__(message)
        self.pair = pair
        self.member = member


class DepthError(ValueError):
    """W-mapping level beyond the depth cap or the family's extent."""


class WLimitNotReached(RuntimeError):
    def __init__(self, message, last_gap, value):
        super().__init__(message)
        self.last_gap = last_gap
        self.value = value


# --------------------------------------------------------------------------
# point mappings


class PointMapping:
    dim: int

    def __call__(self, x):
        return self._map(as_point(x, self.dim))

    def _map(self, x):
        raise NotImplementedError

    def _map_batch(self, X):
        return np.array([self._map(x) for x in X])

    @property
    def certified_nonexpansive(self) -> bool:
        raise NotImplementedError

    def to_record(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Identity(PointMapping):
    dim: int

    def _map(self, x):
        return x

    def _map_batch(self, X):
        return X

    @property
    def certified_nonexpansive(self):
        return True

    def to_record(self):
        return {"type": "identity", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Constant(PointMapping):
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target", as_point(self.target))

    @property
    def dim(self):
        return self.target.size

    def _map(self, x):
        return self.target.copy()

    def _map_batch(self, X):
        return np.broadcast_to(self.target, X.shape).copy()

    @property
    def certified_nonexpansive(self):
        return True

    def to_record(self):
        return {"type": "constant", "target": self.target.tolist()}


@dataclass(frozen=True, eq=False)
class Scale(PointMapping):
    """``x -> center + factor * (x - center)``."""

    factor: float
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "factor", float(self.factor))
        object.__setattr__(self, "center", as_point(self.center))

    @property
    def dim(self):
        return self.center.size

    def _map(self, x):
        return self.center + self.factor * (x - self.center)

    _map_batch = _map

    @property
    def certified_nonexpansive(self):
        return abs(self.factor) <= 1.0

    def to_record(self):
        return {"type": "scale", "factor": self.factor, "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class Linear(PointMapping):
    """``x -> center + M (x - center)``; nonexpansive iff the spectral norm is <= 1."""

    matrix: np.ndarray
    center: np.ndarray = None

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.shape[0] != M.shape[1] or not np.all(np.isfinite(M)):
            raise DimensionError(f"matrix must be square and finite, got {M.shape}")
        c = np.zeros(M.shape[0]) if self.center is None else as_point(self.center, M.shape[0])
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "center", c)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def _map(self, x):
        return self.center + self.matrix @ (x - self.center)

    def _map_batch(self, X):
        return self.center + (X - self.center) @ self.matrix.T

    @property
    def certified_nonexpansive(self):
        return bool(np.linalg.norm(self.matrix, 2) <= 1.0 + 1e-12)

    def to_record(self):
        return {"type": "linear", "matrix": self.matrix.tolist(), "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class ProjectOnto(PointMapping):
    C: ConvexSet

    @property
    def dim(self):
        return self.C.dim

    def _map(self, x):
        return self.C.project(x)

    def _map_batch(self, X):
        return project_batch(self.C, X)

    @property
    def certified_nonexpansive(self):
        return True

    def to_record(self):
        return {"type": "project", "set": self.C.to_record()}


@dataclass(frozen=True, eq=False)
class AveragedComposition(PointMapping):
    """``(1 - weight) I + weight * (T_m o ... o T_1)``; ``maps`` are applied first to last."""

    maps: tuple
    weight: float = 1.0

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("composition needs at least one mapping")
        if len({m.dim for m in maps}) != 1:
            raise DimensionError("composed mappings disagree in dimension")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("averaging weight must lie in [0, 1]")
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self):
        return self.maps[0].dim

    def _map(self, x):
        v = x
        for m in self.maps:
            v = m._map(v)
        return (1.0 - self.weight) * x + self.weight * v

    def _map_batch(self, X):
        V = X
        for m in self.maps:
            V = m._map_batch(V)
        return (1.0 - self.weight) * X + self.weight * V

    @property
    def certified_nonexpansive(self):
        return all(m.certified_nonexpansive for m in self.maps)

    def to_record(self):
        return {"type": "averaged", "weight": self.weight, "maps": [m.to_record() for m in self.maps]}


def apply_mapping(T: PointMapping, x):
    return T(x)


def mapping_from_record(rec, dim=None) -> PointMapping:
    kind = rec.get("type")
    if kind == "identity":
        return Identity(int(rec.get("dim", dim)))
    if kind == "constant":
        return Constant(rec["target"])
    if kind == "scale":
        center = rec.get("center")
        if center is None:
            center = np.zeros(int(rec.get("dim", dim)))
        return Scale(rec["factor"], center)
    if kind == "linear":
        return Linear(rec["matrix"], rec.get("center"))
    if kind == "project":
        return ProjectOnto(set_from_record(rec["set"]))
    if kind == "averaged":
        return AveragedComposition(tuple(mapping_from_record(m, dim) for m in rec["maps"]),
                                   rec.get("weight", 1.0))
    raise ValueError(f"unknown mapping type {kind!r}")


def find_expansive_pair(T: PointMapping, rng=None, pairs=DEFAULT_PAIRS):
    """Return ``(x, y, ratio)`` for the first sampled pair with ``|Tx-Ty| > |x-y|``, else None."""
    rng = make_rng(0 if rng is None else rng)
    xs, ys = sample_pairs(rng, T.dim, pairs, SAMPLE_SCALE)
    dxy = np.linalg.norm(xs - ys, axis=1)
    dT = np.linalg.norm(T._map_batch(xs) - T._map_batch(ys), axis=1)
    bad = np.nonzero(dT > dxy * (1.0 + 1e-10))[0]
    if bad.size == 0:
        return None
    i = bad[0]
    return xs[i], ys[i], float(dT[i] / dxy[i])


def verify_nonexpansive(T: PointMapping, rng=None, pairs=DEFAULT_PAIRS) -> bool:
    return find_expansive_pair(T, rng, pairs) is None


# --------------------------------------------------------------------------
# inverse strongly monotone operators


class IsmOperator:
    """Operator ``A`` with certified constants.

    ``alpha`` is the certified inverse-strong-monotonicity constant used for
    the step-size corridor ``(0, 2 alpha)``. ``nominal_alpha`` is the value a
    textbook bound would assign (for gradients and Lipschitz wrappers, 2/L);
    it is kept only so that both corridors can be reported.
    """

    dim: int
    alpha: float
    lipschitz: float
    nominal_alpha: float

    def __call__(self, x):
        return self._apply(as_point(x, self.dim))

    def _apply(self, x):
        raise NotImplementedError

    def _apply_batch(self, X):
        return np.array([self._apply(x) for x in X])

    def certified_corridor(self):
        return (0.0, 2.0 * self.alpha)

    def nominal_corridor(self):
        return (0.0, 2.0 * self.nominal_alpha)

    def to_record(self):
        raise NotImplementedError


def apply_operator(A: IsmOperator, x):
    return A(x)


@dataclass(frozen=True, eq=False)
class Zero(IsmOperator):
    """The zero operator; ISM for every ``alpha``, so the default is unbounded."""

    dim: int
    alpha: float = math.inf

    @property
    def lipschitz(self):
        return 0.0

    @property
    def nominal_alpha(self):
        return self.alpha

    def _apply(self, x):
        return np.zeros(self.dim)

    def _apply_batch(self, X):
        return np.zeros_like(X)

    def to_record(self):
        rec = {"type": "zero", "dim": self.dim}
        if math.isfinite(self.alpha):
            rec["alpha"] = self.alpha
        return rec


def _affine_alpha(M):
    """Largest ``a`` with ``sym(M) - a M^T M`` positive semidefinite."""
    S = 0.5 * (M + M.T)
    P = M.T @ M
    top = np.linalg.norm(M, 2)
    if top == 0.0:
        raise ValueError("zero matrix: use the Zero operator")
    if np.allclose(M, M.T, atol=1e-14):
        ev = np.linalg.eigvalsh(S)
        if ev[0] < -1e-12 * top:
            raise CertificationError("matrix is not positive semidefinite, so not monotone")
        return 1.0 / ev[-1]

    def feasible(a):
        return np.linalg.eigvalsh(S - a * P)[0] >= -1e-12 * top

    lo, hi = 0.0, 1.0 / top
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if feasible(mid) else (lo, mid)
    if lo <= 1e-9 / top:
        raise CertificationError("matrix is not inverse strongly monotone")
    return lo


@dataclass(frozen=True, eq=False)
class Affine(IsmOperator):
    """``x -> M x + q``; ``alpha`` defaults to the exact value from eigenanalysis."""

    matrix: np.ndarray
    shift: np.ndarray = None
    alpha: float = None

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise DimensionError("matrix must be square")
        q = np.zeros(M.shape[0]) if self.shift is None else as_point(self.shift, M.shape[0])
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "shift", q)
        exact = _affine_alpha(M)
        if self.alpha is None:
            object.__setattr__(self, "alpha", exact)
        elif self.alpha > exact * (1 + 1e-12):
            raise CertificationError(f"declared alpha {self.alpha} exceeds exact value {exact}")

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def lipschitz(self):
        return float(np.linalg.norm(self.matrix, 2))

    @property
    def nominal_alpha(self):
        return self.alpha

    def _apply(self, x):
        return self.matrix @ x + self.shift

    def _apply_batch(self, X):
        return X @ self.matrix.T + self.shift

    def to_record(self):
        return {"type": "affine", "matrix": self.matrix.tolist(), "shift": self.shift.tolist()}


@dataclass(frozen=True, eq=False)
class GradientQuadratic(IsmOperator):
    """Gradient ``Q x + c`` of ``f(x) = x^T Q x / 2 + c^T x`` with ``Q`` symmetric PSD."""

    Q: np.ndarray
    c: np.ndarray = None
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be square and symmetric")
        ev = np.linalg.eigvalsh(Q)
        if ev[0] < -1e-12 * max(1.0, abs(ev[-1])):
            raise CertificationError("Q is not positive semidefinite")
        if ev[-1] <= EPS_EQ:
            raise ValueError("Q has no positive eigenvalue: use the Zero operator")
        c = np.zeros(Q.shape[0]) if self.c is None else as_point(self.c, Q.shape[0])
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dim(self):
        return self.Q.shape[0]

    @property
    def lipschitz(self):
        return float(self.eigenvalues[-1])

    @property
    def alpha(self):
        # min over nonzero eigenvalues of 1/lambda_i
        return 1.0 / float(self.eigenvalues[-1])

    @property
    def nominal_alpha(self):
        return 2.0 / self.lipschitz

    def _apply(self, x):
        return self.Q @ x + self.c

    def _apply_batch(self, X):
        return X @ self.Q + self.c

    def objective(self, x):
        x = as_point(x, self.dim)
        return 0.5 * float(x @ self.Q @ x) + float(self.c @ x)

    def to_record(self):
        return {"type": "gradient_quadratic", "Q": self.Q.tolist(), "c": self.c.tolist()}


@dataclass(frozen=True, eq=False)
class ResidualOfPseudocontraction(IsmOperator):
    """``A = I - S`` for a ``k``-strictly pseudocontractive ``S``; ``alpha = (1 - k)/2``."""

    S: PointMapping
    k: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise ValueError("k must lie in [0, 1)")

    @property
    def dim(self):
        return self.S.dim

    @property
    def alpha(self):
        return 0.5 * (1.0 - self.k)

    @property
    def nominal_alpha(self):
        return self.alpha

    @property
    def lipschitz(self):
        return 1.0 / self.alpha

    def _apply(self, x):
        return x - self.S._map(x)

    def _apply_batch(self, X):
        return X - self.S._map_batch(X)

    def to_record(self):
        return {"type": "pseudocontraction_residual", "S": self.S.to_record(), "k": self.k}


@dataclass(frozen=True, eq=False)
class MappingOperator(IsmOperator):
    """A point mapping used as an operator, with constants fixed by :func:`ism_from_lipschitz`."""

    T: PointMapping
    alpha: float
    lipschitz: float
    nominal_alpha: float

    @property
    def dim(self):
        return self.T.dim

    def _apply(self, x):
        return self.T._map(x)

    def _apply_batch(self, X):
        return self.T._map_batch(X)

    def to_record(self):
        return {"type": "lipschitz_mapping", "mapping": self.T.to_record(), "L": self.lipschitz}


def _ism_ratios(A, rng, pairs):
    xs, ys = sample_pairs(rng, A.dim, pairs, SAMPLE_SCALE)
    dA = A._apply_batch(xs) - A._apply_batch(ys)
    nA = np.linalg.norm(dA, axis=1)
    keep = nA > EPS_EQ
    ratios = np.einsum("ij,ij->i", dA[keep], (xs - ys)[keep]) / nA[keep] ** 2
    lips = nA[keep] / np.linalg.norm(xs - ys, axis=1)[keep]
    return ratios, lips


def estimate_ism_constant(A: IsmOperator, rng=None, pairs=DEFAULT_PAIRS) -> float:
    """Smallest sampled ``<Ax-Ay, x-y> / |Ax-Ay|^2``.

    Pairs with ``|Ax-Ay| <= eps_eq`` are skipped (the defining inequality
    holds there trivially); if every pair is degenerate a ``ValueError`` is
    raised.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    ratios, _ = _ism_ratios(A, make_rng(0 if rng is None else rng), pairs)
    if ratios.size == 0:
        raise ValueError("all sampled pairs are degenerate (A x - A y = 0)")
    return float(ratios.min())


def certify_ism(A: IsmOperator, rng=None, pairs=DEFAULT_PAIRS) -> float:
    """Check the declared ``alpha`` against sampling; return the estimate (inf if vacuous)."""
    try:
        est = estimate_ism_constant(A, rng, pairs)
    except ValueError:
        return math.inf
    if est < A.alpha - 1e-8:
        raise CertificationError(f"declared alpha {A.alpha:.6g} exceeds sampled estimate {est:.6g}")
    return est


def sampled_lipschitz(A: IsmOperator, rng=None, pairs=DEFAULT_PAIRS) -> float:
    _, lips = _ism_ratios(A, make_rng(0 if rng is None else rng), pairs)
    return float(lips.max()) if lips.size else 0.0


def ism_from_lipschitz(T: PointMapping, L: float, rng=None, pairs=DEFAULT_PAIRS) -> MappingOperator:
    """Wrap an ``L``-Lipschitz mapping as an ISM operator.

    ``nominal_alpha`` is ``2/L``. That bound does not hold for general
    Lipschitz maps, so ``alpha`` is the sampled certificate (capped at ``1/L``)
    and the mapping is rejected if sampling finds it is not monotone.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    rng = make_rng(0 if rng is None else rng)
    xs, ys = sample_pairs(rng, T.dim, pairs, SAMPLE_SCALE)
    dT = T._map_batch(xs) - T._map_batch(ys)
    nT = np.linalg.norm(dT, axis=1)
    dxy = np.linalg.norm(xs - ys, axis=1)
    bad = np.nonzero(nT > L * dxy * (1.0 + 1e-10))[0]
    if bad.size:
        i = bad[0]
        raise CertificationError(f"mapping is not {L}-Lipschitz: ratio {nT[i] / dxy[i]:.6g}",
                                 pair=(xs[i], ys[i]))
    if float((nT / dxy).max()) <= EPS_EQ:
        raise CertificationError("Lipschitz constant is not attained (mapping is constant)")
    keep = nT > EPS_EQ
    est = float((np.einsum("ij,ij->i", dT[keep], (xs - ys)[keep]) / nT[keep] ** 2).min())
    if est <= 0:
        raise CertificationError(f"mapping is not monotone (sampled ISM ratio {est:.6g})")
    return MappingOperator(T, alpha=min(est, 1.0 / L), lipschitz=float(L), nominal_alpha=2.0 / L)


def find_pseudocontraction_violation(S: PointMapping, k: float, rng=None, pairs=DEFAULT_PAIRS):
    rng = make_rng(0 if rng is None else rng)
    xs, ys = sample_pairs(rng, S.dim, pairs, SAMPLE_SCALE)
    sx, sy = S._map_batch(xs), S._map_batch(ys)
    lhs = np.sum((sx - sy) ** 2, axis=1)
    base = np.sum((xs - ys) ** 2, axis=1)
    rhs = base + k * np.sum(((xs - sx) - (ys - sy)) ** 2, axis=1)
    bad = np.nonzero(lhs > rhs + 1e-10 * base)[0]
    if bad.size == 0:
        return None
    return xs[bad[0]], ys[bad[0]]


def ism_from_pseudocontraction(S: PointMapping, k: float, rng=None, pairs=DEFAULT_PAIRS):
    """Return ``A = I - S`` with ``alpha = (1-k)/2`` after sampling the pseudocontraction inequality."""
    if not 0.0 <= k < 1.0:
        raise ValueError("k must lie in [0, 1)")
    bad = find_pseudocontraction_violation(S, k, rng, pairs)
    if bad is not None:
        raise CertificationError(f"mapping is not {k}-strictly pseudocontractive", pair=bad)
    return ResidualOfPseudocontraction(S, float(k))


def operator_from_record(rec, dim=None) -> IsmOperator:
    kind = rec.get("type")
    if kind == "zero":
        return Zero(int(rec.get("dim", dim)), float(rec.get("alpha", math.inf)))
    if kind == "identity":
        return Affine(np.eye(int(rec.get("dim", dim))))
    if kind == "affine":
        return Affine(rec["matrix"], rec.get("shift"), rec.get("alpha"))
    if kind == "gradient_quadratic":
        return GradientQuadratic(rec["Q"], rec.get("c"))
    if kind == "pseudocontraction_residual":
        return ism_from_pseudocontraction(mapping_from_record(rec["S"], dim), float(rec.get("k", 0.0)))
    if kind == "lipschitz_mapping":
        return ism_from_lipschitz(mapping_from_record(rec["mapping"], dim), float(rec["L"]))
    raise ValueError(f"unknown operator type {kind!r}")


# --------------------------------------------------------------------------
# W-mapping


TAIL_RULES = ("repeat-last", "identity", None)


@dataclass(frozen=True, eq=False)
class WMapping:
    """Family ``T_1, T_2, ...`` (finite prefix plus tail rule) with weights ``mu_k``.

    ``mu`` is a scalar (constant schedule) or a sequence whose last entry
    repeats. Every member must be certified nonexpansive; a failing member is
    reported together with a sampled witnessing pair.
    """

    family: tuple
    mu: object = DEFAULT_MU
    tail: str = "repeat-last"
    depth_cap: int = DEFAULT_DEPTH_CAP
    b_mu: float = None

    def __post_init__(self):
        fam = tuple(self.family)
        if not fam:
            raise ValueError("family needs at least one mapping")
        if len({T.dim for T in fam}) != 1:
            raise DimensionError("family members disagree in dimension")
        if self.tail not in TAIL_RULES:
            raise ValueError(f"tail rule must be one of {TAIL_RULES}")
        if self.depth_cap < 1:
            raise ValueError("depth_cap must be >= 1")
        mus = np.atleast_1d(np.asarray(self.mu, dtype=float))
        b = float(mus.max()) if self.b_mu is None else float(self.b_mu)
        if not b < 1.0 or np.any(mus <= 0.0) or np.any(mus > b):
            raise ValueError(f"weights must satisfy 0 < mu_k <= b_mu < 1 (b_mu = {b})")
        for i, T in enumerate(fam, start=1):
            if not T.certified_nonexpansive:
                hit = find_expansive_pair(T, make_rng(i), 1000)
                pair = None if hit is None else (hit[0], hit[1])
                detail = "" if hit is None else f"; witness ratio {hit[2]:.6g}"
                raise CertificationError(f"family member T_{i} is not nonexpansive{detail}",
                                         pair=pair, member=i)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "_mus", mus)
        object.__setattr__(self, "b_mu", b)

    @property
    def dim(self):
        return self.family[0].dim

    def member(self, k):
        if k < 1:
            raise DepthError("members are indexed from 1")
        if k <= len(self.family):
            return self.family[k - 1]
        if self.tail == "repeat-last":
            return self.family[-1]
        if self.tail == "identity":
            return Identity(self.dim)
        raise DepthError(f"family has {len(self.family)} members and no tail rule; T_{k} undefined")

    def weight(self, k):
        return float(self._mus[min(k, self._mus.size) - 1])

    def apply(self, n, x):
        return w_apply(self, n, x)

    def to_record(self):
        mu = float(self._mus[0]) if self._mus.size == 1 else self._mus.tolist()
        return {"mappings": [T.to_record() for T in self.family], "mu": mu,
                "tail": self.tail, "depth_cap": self.depth_cap}


def _w_raw(W, n, x):
    v = x
    for k in range(n, 0, -1):
        mu = W.weight(k)
        v = mu * W.member(k)._map(v) + (1.0 - mu) * x
    return v


def w_apply(W: WMapping, n: int, x):
    """``W_n x`` by the backward recursion; ``n`` mapping applications."""
    if n < 1:
        raise DepthError("level n must be >= 1")
    if n > W.depth_cap:
        raise DepthError(f"level {n} exceeds depth cap {W.depth_cap}")
    return _w_raw(W, n, as_point(x, W.dim))


def w_limit_apply(W: WMapping, x, tol: float):
    """Approximate ``W x = lim W_n x``: first level ``n >= 2`` with ``|W_n x - W_{n-1} x| <= tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = as_point(x, W.dim)
    prev = _w_raw(W, 1, x)
    gap = math.inf
    for n in range(2, W.depth_cap + 1):
        cur = _w_raw(W, n, x)
        gap = float(np.linalg.norm(cur - prev))
        if gap <= tol:
            return cur
        prev = cur
    raise WLimitNotReached(f"depth cap {W.depth_cap} reached with level gap {gap:.3e}", gap, prev)


def family_from_record(rec, dim=None) -> WMapping:
    fam = tuple(mapping_from_record(m, dim) for m in rec["mappings"])
    tail = rec.get("tail", "repeat-last")
    return WMapping(fam, rec.get("mu", DEFAULT_MU), None if tail == "none" else tail,
                    int(rec.get("depth_cap", DEFAULT_DEPTH_CAP)), rec.get("b_mu"))


def identity_family(dim, **kw) -> WMapping:
    return WMapping((Identity(dim),), **kw)
