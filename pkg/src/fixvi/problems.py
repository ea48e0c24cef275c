"""Seeded problem generators whose solutions are independently computable."""
import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_point, make_rng
from .diagnostics import OracleError, oracle_solve
from .operators import (
    CertificationError,
    GradientQuadratic,
    Identity,
    Linear,
    ProjectOnto,
    Scale,
    WMapping,
    Zero,
    certify_ism,
    find_expansive_pair,
    ism_from_pseudocontraction,
)
from .schemes import SchemeState, step_karahan, step_khan, step_mann, step_picard
from .sets import Ball, Box, WholeSpace

MAX_DIM = 20
MAX_PREFIX = 32
CERT_PAIRS = 10_000


@dataclass(eq=False)
class ProblemInstance:
    C: object
    A: object
    W: WMapping
    oracle_hint: np.ndarray = None
    label: str = ""
    generator: dict = None  # {"name": ..., args} when built by a generator
    lam_corridor: tuple = None
    x0: np.ndarray = None
    extra: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.C.dim

    def singleton(self) -> bool:
        return bool(self.extra.get("singleton", False))

    def to_record(self):
        """Replayable description: the generator call if there is one, else explicit records."""
        if self.generator is not None:
            return dict(self.generator)
        rec = {"set": self.C.to_record(), "operator": self.A.to_record(), "family": self.W.to_record()}
        if self.x0 is not None:
            rec["x0"] = np.asarray(self.x0).tolist()
        return rec


def certify_instance(p: ProblemInstance, rng=0, pairs=CERT_PAIRS):
    """Sampled certificates for the operator and each family member."""
    certify_ism(p.A, rng, pairs)
    for i, T in enumerate(p.W.family, start=1):
        hit = find_expansive_pair(T, rng, pairs)
        if hit is not None:
            raise CertificationError(f"family member T_{i} expands the pair with ratio {hit[2]:.6g}",
                                     pair=hit[:2], member=i)


def _check_dim(d):
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must lie in [1, {MAX_DIM}]")


def random_orthogonal(rng, d):
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def gen_quadratic_box(d, seed=0, Q=None, c=None, certify=True) -> ProblemInstance:
    """Minimise ``x^T Q x / 2 + c^T x`` over ``[0, 1]^d``.

    ``Q`` has eigenvalues in ``[0.5, 2]`` unless given. The family is the box
    projection repeated, so its common fixed-point set is the box itself and
    the problem reduces to the variational inequality.
    """
    _check_dim(d)
    rng = make_rng(seed)
    Q_given = Q is not None or c is not None
    if Q is None:
        V = random_orthogonal(rng, d)
        Q = V @ np.diag(rng.uniform(0.5, 2.0, d)) @ V.T
        Q = 0.5 * (Q + Q.T)
    if c is None:
        c = rng.uniform(-2.0, 1.0, d)
    C = Box.unit(d)
    A = GradientQuadratic(Q, c)
    W = WMapping((ProjectOnto(C),), tail="repeat-last")
    gen = None if Q_given else {"generator": "quadratic_box", "d": d, "seed": int(seed)}
    p = ProblemInstance(C, A, W, label=f"quadratic_box(d={d})", generator=gen,
                        extra={"singleton": True, "Q": np.asarray(Q), "c": np.asarray(c)})
    if certify:
        certify_instance(p)
    p.oracle_hint = oracle_solve(p)
    p.x0 = C.project(rng.uniform(0.0, 1.0, d))
    return p


def gen_common_fixed_family(d, m, seed=0, sigmas=None, z_star=None, mu=0.5, certify=True) -> ProblemInstance:
    """Scalings ``T_k = Scale(sigma_k, z*)`` on ``Ball(0, 2)`` sharing the single fixed point ``z*``.

    ``A`` is the zero operator, so the solution set is ``{z*}``.
    """
    _check_dim(d)
    if not 1 <= m <= MAX_PREFIX:
        raise ValueError(f"prefix length must lie in [1, {MAX_PREFIX}]")
    rng = make_rng(seed)
    if z_star is None:
        u = rng.standard_normal(d)
        z_star = u / np.linalg.norm(u) * rng.uniform(0.0, 1.5)
    z_star = as_point(z_star, d)
    if sigmas is None:
        sigmas = rng.uniform(0.3, 0.9, m)
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), (m,))
    C = Ball(np.zeros(d), 2.0)
    if not np.linalg.norm(z_star) < 2.0:
        raise ValueError("z* must lie in the interior of Ball(0, 2)")
    fam = tuple(Scale(s, z_star) for s in sigmas)
    W = WMapping(fam, mu=mu, tail="repeat-last")
    gen = {"generator": "common_fixed_family", "d": d, "m": m, "seed": int(seed)}
    p = ProblemInstance(C, Zero(d), W, label=f"common_fixed_family(d={d}, m={m})", generator=gen,
                        extra={"singleton": True, "sigmas": sigmas.copy()})
    if certify:
        certify_instance(p)
    z = oracle_solve(p, cross_check=False)
    if np.linalg.norm(z - z_star) > 1e-10:
        raise OracleError(f"oracle point {z} disagrees with the common fixed point {z_star}")
    p.oracle_hint = z_star
    p.x0 = C.project(rng.uniform(-1.0, 1.0, d) * 2.0)
    return p


def pseudocontraction_matrix(d, k, rng):
    """Symmetric ``S`` with spectrum in ``[-(1+k)/(1-k), 0.5]`` -- the extreme value attained.

    A symmetric ``S`` is ``k``-strictly pseudocontractive iff every eigenvalue
    lies in ``[-(1+k)/(1-k), 1]``; keeping the top below 1 gives ``Fix S = {0}``.
    """
    low = -(1.0 + k) / (1.0 - k)
    sig = rng.uniform(low, 0.5, d)
    sig[0] = low
    V = random_orthogonal(rng, d)
    return V @ np.diag(sig) @ V.T


def gen_pseudocontractive(d, k=0.0, seed=0, S=None, retries=5) -> ProblemInstance:
    """``A = I - S`` for a ``k``-strictly pseudocontractive ``S`` on ``Ball(0, 2)``.

    The step-size corridor is ``(0, 1 - k)`` and the family is the identity,
    so the solution set is ``Fix S``.
    """
    _check_dim(d)
    if not 0.0 <= k < 1.0:
        raise ValueError("k must lie in [0, 1)")
    rng = make_rng(seed)
    last = None
    for _ in range(retries if S is None else 1):
        S_try = S if S is not None else Linear(pseudocontraction_matrix(d, k, rng))
        try:
            A = ism_from_pseudocontraction(S_try, k, rng, CERT_PAIRS)
            break
        except CertificationError as exc:
            last = exc
    else:
        raise CertificationError(f"could not certify a {k}-strict pseudocontraction: {last}")
    C = Ball(np.zeros(d), 2.0)
    W = WMapping((Identity(d),), tail="repeat-last")
    gen = {"generator": "pseudocontractive", "d": d, "k": float(k), "seed": int(seed)}
    if S is not None:
        gen = None
    p = ProblemInstance(C, A, W, label=f"pseudocontractive(d={d}, k={k})", generator=gen,
                        lam_corridor=(0.0, 1.0 - k), extra={"S": A.S, "singleton": True})
    p.oracle_hint = oracle_solve(p, cross_check=False)
    u = rng.standard_normal(d)
    p.x0 = u / np.linalg.norm(u) * 1.5
    return p


def gen_contraction_speed(seed=0, d=1):
    """A contraction ``T = Scale(sigma, z)`` with ``sigma`` in ``[0.5, 0.95]`` and its fixed point."""
    rng = make_rng(seed)
    sigma = rng.uniform(0.5, 0.95)
    z = rng.uniform(-1.0, 1.0, d)
    return Scale(sigma, z), z


def iterations_to_tol(step, x0, z, tol=1e-8, max_iter=100_000):
    """Number of ``step`` applications until ``|x_n - z| <= tol``, plus the iterates."""
    state = SchemeState(0, as_point(x0))
    xs = [state.x]
    while np.linalg.norm(state.x - z) > tol:
        if state.n >= max_iter:
            return math.inf, np.array(xs)
        state = step(state)
        xs.append(state.x)
    return state.n, np.array(xs)


def speed_comparison(T, z, x0=None, alpha=0.5, tol=1e-8, max_iter=100_000):
    """Iterations to ``tol`` for Picard, Mann, Khan and the hybrid scheme with ``A = 0``.

    The hybrid scheme runs with the W-mapping of the constant family ``(T, T, ...)``.
    """
    z = as_point(z)
    x0 = z + 1.0 if x0 is None else as_point(x0)
    C = WholeSpace(z.size)
    A = Zero(z.size)
    W = WMapping((T,), tail="repeat-last")
    out = {}
    out["picard"], _ = iterations_to_tol(lambda s: step_picard(s, T), x0, z, tol, max_iter)
    out["mann"], _ = iterations_to_tol(lambda s: step_mann(s, T, alpha), x0, z, tol, max_iter)
    out["khan"], khan_xs = iterations_to_tol(lambda s: step_khan(s, T, alpha), x0, z, tol, max_iter)
    out["karahan12"], _ = iterations_to_tol(
        lambda s: step_karahan(s, C, A, W, 1.0, alpha), x0, z, tol, max_iter)
    d = np.linalg.norm(khan_xs - z, axis=1)
    out["khan_factor"] = float(d[1] / d[0]) if d.size > 1 and d[0] > 0 else 0.0
    return out
