"""Iteration steppers, parameter schedules and the run loop.

The main scheme (``karahan12``) is the hybrid extragradient iteration

    t_n     = P_C(x_n - lam_n A x_n)
    y_n     = (1 - a_n) x_n + a_n W_n t_n
    x_{n+1} = W_n P_C(y_n - lam_n A y_n)

The baselines are the Iiduka-Takahashi anchored iteration, the
Takahashi-Toyoda Mann-type iteration, the Yao et al. three-weight iteration
and Khan's Picard-Mann hybrid. Baselines that need a single nonexpansive
``T`` are given the same level-``n`` W-mapping the main scheme uses.
"""
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .core import EPS_EQ, EPS_RESIDUAL, MAX_ITER, as_point
from .diagnostics import Record, Trace, residual_fix, residual_vi
from .operators import _w_raw

SCHEME_NAMES = ("karahan12", "iiduka-takahashi", "takahashi-toyoda", "yao", "khan")
CORRIDOR_MARGIN = 1e-6


class CorridorError(ValueError):
    """A step size or weight lies outside its admissible interval."""


class SchemeDiverged(RuntimeError):
    def __init__(self, message, state, trace):
        super().__init__(message)
        self.state = state
        self.trace = trace


# --------------------------------------------------------------------------
# schedules


class ParamSchedule:
    def __call__(self, n: int) -> float:
        raise NotImplementedError

    @property
    def bounds(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantSchedule(ParamSchedule):
    value: float

    def __call__(self, n):
        return self.value

    @property
    def bounds(self):
        return (self.value, self.value)

    def to_record(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class PeriodicSchedule(ParamSchedule):
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("periodic schedule needs at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __call__(self, n):
        return self.values[n % len(self.values)]

    @property
    def bounds(self):
        return (min(self.values), max(self.values))

    def to_record(self):
        return {"type": "periodic", "values": list(self.values)}


@dataclass(frozen=True)
class HarmonicClamped(ParamSchedule):
    """``scale / (n + 1)`` clipped into ``[lo, hi]``."""

    lo: float
    hi: float
    scale: float = 1.0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("need lo <= hi")

    def __call__(self, n):
        return min(self.hi, max(self.lo, self.scale / (n + 1)))

    @property
    def bounds(self):
        return (self.lo, self.hi)

    def to_record(self):
        return {"type": "harmonic", "lo": self.lo, "hi": self.hi, "scale": self.scale}


def schedule_from_record(rec):
    if isinstance(rec, (int, float)):
        return ConstantSchedule(float(rec))
    kind = rec.get("type", "constant")
    if kind == "constant":
        return ConstantSchedule(float(rec["value"]))
    if kind == "periodic":
        return PeriodicSchedule(tuple(rec["values"]))
    if kind == "harmonic":
        return HarmonicClamped(float(rec["lo"]), float(rec["hi"]), float(rec.get("scale", 1.0)))
    raise ValueError(f"unknown schedule type {kind!r}")


# --------------------------------------------------------------------------
# specs and state


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    lam: ParamSchedule = None
    alpha: ParamSchedule = None
    anchor: np.ndarray = None
    beta: ParamSchedule = None
    gamma: ParamSchedule = None
    variant: str = "verbatim"  # yao only: "verbatim" or "amended"
    label: str = None

    def __post_init__(self):
        if self.kind not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {self.kind!r}; expected one of {SCHEME_NAMES}")
        if self.variant not in ("verbatim", "amended"):
            raise ValueError("variant must be 'verbatim' or 'amended'")

    @property
    def name(self):
        return self.label or self.kind

    def to_record(self):
        rec = {"name": self.kind}
        for key in ("lam", "alpha", "beta", "gamma"):
            sched = getattr(self, key)
            if sched is not None:
                rec["lambda" if key == "lam" else key] = sched.to_record()
        if self.anchor is not None:
            rec["anchor"] = np.asarray(self.anchor).tolist()
        if self.kind == "yao":
            rec["variant"] = self.variant
        if self.label:
            rec["label"] = self.label
        return rec


@dataclass
class SchemeState:
    n: int
    x: np.ndarray
    aux: np.ndarray = None


@dataclass(frozen=True)
class StopRule:
    residual_kind: str = "combined"  # "vi", "fixed_point" or "combined"
    tol: float = EPS_RESIDUAL
    max_iter: int = MAX_ITER

    def __post_init__(self):
        if self.residual_kind not in ("vi", "fixed_point", "combined"):
            raise ValueError(f"unknown residual kind {self.residual_kind!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")

    def satisfied(self, rec: Record) -> bool:
        if self.residual_kind == "vi":
            return rec.residual_vi <= self.tol
        if self.residual_kind == "fixed_point":
            return rec.residual_fix <= self.tol
        return rec.residual_vi <= self.tol and rec.residual_fix <= self.tol

    def to_record(self):
        return {"residual": self.residual_kind, "tol": self.tol, "max_iter": self.max_iter}


# --------------------------------------------------------------------------
# steppers


def _check_lam(lam, A):
    if not lam > 0 or not lam < 2.0 * A.alpha:
        raise CorridorError(f"lambda_n = {lam:.6g} outside (0, 2*alpha) = (0, {2.0 * A.alpha:.6g})")


def _check_open_unit(a, name="alpha_n"):
    if not 0.0 < a < 1.0:
        raise CorridorError(f"{name} = {a:.6g} outside (0, 1)")


def _check_closed_unit(a, name):
    if not 0.0 <= a <= 1.0:
        raise CorridorError(f"{name} = {a:.6g} outside [0, 1]")


def _pc_step(C, A, v, lam):
    return C.project(v - lam * A._apply(v))


def step_karahan(state, C, A, W, lam, a, depth=None):
    """One step of the hybrid extragradient iteration; returns the new state with ``aux = y_n``."""
    _check_lam(lam, A)
    _check_open_unit(a)
    n = state.n
    depth = min(n + 1, W.depth_cap) if depth is None else depth
    x = state.x
    t = _pc_step(C, A, x, lam)
    y = (1.0 - a) * x + a * _w_raw(W, depth, t)
    x_next = _w_raw(W, depth, _pc_step(C, A, y, lam))
    return SchemeState(n + 1, x_next, y)


def step_iiduka_takahashi(state, C, A, T, lam, a, anchor):
    """``x_{n+1} = a u + (1 - a) T P_C(x_n - lam A x_n)``."""
    _check_lam(lam, A)
    _check_closed_unit(a, "alpha_n")
    x_next = a * anchor + (1.0 - a) * T(_pc_step(C, A, state.x, lam))
    return SchemeState(state.n + 1, x_next)


def step_takahashi_toyoda(state, C, A, T, lam, a):
    """``x_{n+1} = a x_n + (1 - a) T P_C(x_n - lam A x_n)``."""
    _check_lam(lam, A)
    _check_closed_unit(a, "alpha_n")
    x = state.x
    x_next = a * x + (1.0 - a) * T(_pc_step(C, A, x, lam))
    return SchemeState(state.n + 1, x_next)


def step_yao(state, C, A, S, a, b, g, lam, anchor, variant="verbatim"):
    """Three-weight iteration with ``y_n = P_C(x_n - lam A x_n)``.

    ``verbatim`` uses ``S P_C(x_n - lam y_n)`` as printed; ``amended`` uses
    ``S P_C(x_n - lam A y_n)``.
    """
    for w, name in ((a, "alpha_n"), (b, "beta_n"), (g, "gamma_n")):
        _check_closed_unit(w, name)
    if abs(a + b + g - 1.0) > EPS_EQ:
        raise CorridorError(f"weights sum to {a + b + g:.12g}, not 1")
    _check_lam(lam, A)
    x = state.x
    y = _pc_step(C, A, x, lam)
    inner = x - lam * (A._apply(y) if variant == "amended" else y)
    x_next = a * anchor + b * x + g * S(C.project(inner))
    return SchemeState(state.n + 1, x_next, y)


def step_khan(state, T, a):
    """Picard-Mann hybrid: ``y_n = a x_n + (1 - a) T x_n``, ``x_{n+1} = T y_n``."""
    _check_open_unit(a)
    x = state.x
    y = a * x + (1.0 - a) * T(x)
    return SchemeState(state.n + 1, T(y), y)


def step_picard(state, T):
    return SchemeState(state.n + 1, T(state.x))


def step_mann(state, T, a):
    """Krasnoselskii-Mann ``x_{n+1} = a x_n + (1 - a) T x_n``."""
    _check_open_unit(a)
    x = state.x
    return SchemeState(state.n + 1, a * x + (1.0 - a) * T(x))


# --------------------------------------------------------------------------
# run loop


def default_lambda(A):
    return ConstantSchedule(A.alpha if math.isfinite(A.alpha) else 1.0)


def resolve_spec(spec: SchemeSpec, problem) -> SchemeSpec:
    """Fill in default schedules and anchors."""
    C, A = problem.C, problem.A
    lam = spec.lam or default_lambda(A)
    alpha = spec.alpha or ConstantSchedule(0.5)
    anchor = spec.anchor
    if spec.kind in ("iiduka-takahashi", "yao") and anchor is None:
        anchor = C.project(np.zeros(C.dim))
    beta, gamma = spec.beta, spec.gamma
    if spec.kind == "yao":
        beta = beta or ConstantSchedule(0.5)
    return replace(spec, lam=lam, alpha=alpha, anchor=anchor, beta=beta, gamma=gamma)


def validate_corridors(spec: SchemeSpec, A):
    """Reject schedules whose bounds leave the admissible corridors."""
    if spec.kind != "khan":
        lo, hi = spec.lam.bounds
        if not lo > 0:
            raise CorridorError(f"lambda lower bound {lo:.6g} must be positive")
        if math.isfinite(A.alpha):
            cap = 2.0 * A.alpha * (1.0 - CORRIDOR_MARGIN)
            if hi > cap:
                raise CorridorError(
                    f"lambda upper bound {hi:.12g} violates the strict corridor: "
                    f"must be < 2*alpha = {2.0 * A.alpha:.12g} (enforced cap {cap:.12g})")
    lo, hi = spec.alpha.bounds
    if spec.kind in ("karahan12", "khan", "iiduka-takahashi", "takahashi-toyoda"):
        if not (lo > 0.0 and hi < 1.0):
            raise CorridorError(f"alpha_n bounds [{lo:.6g}, {hi:.6g}] not inside (0, 1)")
    if spec.kind == "yao":
        for sched, name in ((spec.alpha, "alpha"), (spec.beta, "beta"), (spec.gamma, "gamma")):
            if sched is not None:
                slo, shi = sched.bounds
                if slo < 0.0 or shi > 1.0:
                    raise CorridorError(f"{name} bounds [{slo:.6g}, {shi:.6g}] not inside [0, 1]")


def _stepper(spec, problem):
    C, A, W = problem.C, problem.A, problem.W

    def T_at(n):
        depth = min(n + 1, W.depth_cap)
        return lambda v: _w_raw(W, depth, v)

    def step(state):
        n = state.n
        lam, a = spec.lam(n), spec.alpha(n)
        if spec.kind == "karahan12":
            return step_karahan(state, C, A, W, lam, a)
        if spec.kind == "iiduka-takahashi":
            return step_iiduka_takahashi(state, C, A, T_at(n), lam, a, spec.anchor)
        if spec.kind == "takahashi-toyoda":
            return step_takahashi_toyoda(state, C, A, T_at(n), lam, a)
        if spec.kind == "yao":
            b = spec.beta(n)
            g = spec.gamma(n) if spec.gamma is not None else 1.0 - a - b
            return step_yao(state, C, A, T_at(n), a, b, g, lam, spec.anchor, spec.variant)
        return step_khan(state, T_at(n), a)

    return step


def run_scheme(spec: SchemeSpec, problem, x0, stop: StopRule = StopRule(), oracle=None,
               config_echo=None) -> Trace:
    """Iterate ``spec`` on ``problem`` from ``x0`` until ``stop`` is met.

    Corridors are validated against the operator's certified ``alpha`` before
    the first step. A start outside ``C`` is projected onto ``C`` and the event
    is logged in ``trace.events``.
    """
    spec = resolve_spec(spec, problem)
    validate_corridors(spec, problem.A)
    C, A, W = problem.C, problem.A, problem.W
    x0 = as_point(x0, C.dim)
    events = []
    if not C.contains(x0):
        x0 = C.project(x0)
        events.append(f"x0 outside C; projected to {x0.tolist()}")
    oracle = None if oracle is None else as_point(oracle, C.dim)
    step = _stepper(spec, problem)

    def record(state, dt):
        lam = spec.lam(state.n)
        return Record(
            n=state.n, x=state.x,
            residual_vi=residual_vi(C, A, state.x, lam),
            residual_fix=residual_fix(W, state.x),
            dist_to_oracle=None if oracle is None else float(np.linalg.norm(state.x - oracle)),
            step_time_ns=dt, lam=lam)

    echo = {"scheme": spec.to_record(), "stop": stop.to_record(), "x0": x0.tolist()}
    if config_echo:
        echo.update(config_echo)
    trace = Trace([], config_echo=echo, events=events, label=spec.name)
    state = SchemeState(0, x0)
    trace.records.append(record(state, 0))
    while True:
        if stop.satisfied(trace.records[-1]):
            trace.terminated_by = "Tolerance"
            break
        if state.n >= stop.max_iter:
            trace.terminated_by = "MaxIter"
            break
        t0 = time.perf_counter_ns()
        new = step(state)
        dt = time.perf_counter_ns() - t0
        if not np.all(np.isfinite(new.x)):
            trace.terminated_by = f"Error: non-finite iterate at n={new.n}"
            raise SchemeDiverged(trace.terminated_by, state, trace)
        if new.aux is not None:
            trace.records[-1].coupling = float(np.linalg.norm(state.x - new.aux))
        state = new
        trace.records.append(record(state, dt))
    if spec.kind in ("karahan12", "yao", "khan") and trace.records[-1].coupling is None:
        # inner point of the final iterate, for the coupling diagnostic only
        probe = step(state)
        if probe.aux is not None and np.all(np.isfinite(probe.aux)):
            trace.records[-1].coupling = float(np.linalg.norm(state.x - probe.aux))
    return trace
