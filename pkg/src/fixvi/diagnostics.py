"""Residuals, run traces, Fejer checks and the independent reference solver."""
import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .core import as_point
from .operators import WMapping, _w_raw, DepthError
from .sets import Ball, Box, Simplex

TRACE_HEADER = ("n", "residual_vi", "residual_fix", "dist_to_oracle", "step_time_ns")


class OracleError(RuntimeError):
    """The reference solver did not reach a joint stall."""


def residual_vi(C, A, x, lam) -> float:
    """``|x - P_C(x - lam A x)|``; zero exactly on the VI solution set."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    x = as_point(x, C.dim)
    return float(np.linalg.norm(x - C.project(x - lam * A(x))))


def residual_fix(W: WMapping, x, depth=None) -> float:
    """``|x - W_depth x|`` (depth defaults to the W-mapping's cap)."""
    depth = W.depth_cap if depth is None else depth
    if depth < 1 or depth > W.depth_cap:
        raise DepthError(f"depth {depth} outside [1, {W.depth_cap}]")
    x = as_point(x, W.dim)
    return float(np.linalg.norm(x - _w_raw(W, depth, x)))


@dataclass
class Record:
    n: int
    x: np.ndarray
    residual_vi: float
    residual_fix: float
    dist_to_oracle: float = None
    step_time_ns: int = 0
    lam: float = None
    coupling: float = None  # |x_n - y_n| for schemes with an inner point


@dataclass
class Trace:
    records: list
    terminated_by: str = "MaxIter"
    config_echo: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    label: str = ""

    @property
    def final(self) -> Record:
        return self.records[-1]

    @property
    def iterations(self) -> int:
        return self.records[-1].n

    @property
    def converged(self) -> bool:
        return self.terminated_by == "Tolerance"

    def xs(self):
        return np.array([r.x for r in self.records])

    def to_csv(self) -> str:
        return trace_csv(self)


def _fmt(v):
    """Positional decimal with exactly 17 significant digits."""
    v = float(v)
    if not math.isfinite(v):
        return repr(v)
    if v == 0.0:
        return "0." + "0" * 16
    mant, exp = f"{v:.16e}".split("e")
    sign = "-" if mant.startswith("-") else ""
    digits = mant.lstrip("-").replace(".", "")
    e = int(exp)
    if e < 0:
        return f"{sign}0.{'0' * (-e - 1)}{digits}"
    if e + 1 >= len(digits):
        return f"{sign}{digits}{'0' * (e + 1 - len(digits))}"
    return f"{sign}{digits[:e + 1]}.{digits[e + 1:]}"


def trace_csv(trace: Trace, include_timing=True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = TRACE_HEADER if include_timing else TRACE_HEADER[:-1]
    w.writerow(header)
    for r in trace.records:
        row = [str(r.n), _fmt(r.residual_vi), _fmt(r.residual_fix),
               "" if r.dist_to_oracle is None else _fmt(r.dist_to_oracle)]
        if include_timing:
            row.append(str(int(r.step_time_ns)))
        w.writerow(row)
    return buf.getvalue()


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace(trace: Trace, path):
    """Write ``<path>`` (CSV) and the resolved configuration next to it as YAML."""
    path = Path(path)
    atomic_write(path, trace_csv(trace))
    echo = dict(trace.config_echo)
    echo["terminated_by"] = trace.terminated_by
    if trace.events:
        echo["events"] = list(trace.events)
    atomic_write(path.with_suffix(".config.yaml"), yaml.safe_dump(echo, sort_keys=False))


def read_trace_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class FejerReport:
    deltas: np.ndarray
    max_violation: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def fejer_check(trace, z, tol=1e-9) -> FejerReport:
    """Per-step change ``|x_{n+1} - z| - |x_n - z|``; passes if never above ``tol``."""
    xs = trace.xs() if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    d = np.linalg.norm(xs - np.asarray(z, dtype=float), axis=1)
    deltas = np.diff(d)
    worst = float(deltas.max()) if deltas.size else 0.0
    return FejerReport(deltas, max(worst, 0.0) if deltas.size else 0.0, tol)


# --------------------------------------------------------------------------
# reference solver


def _merit(problem, x, lam, depth):
    return residual_vi(problem.C, problem.A, x, lam) + residual_fix(problem.W, x, depth)


def _grid_window(C, z):
    if isinstance(C, Box):
        return C.lower.copy(), C.upper.copy()
    if isinstance(C, Ball):
        return C.center - C.radius, C.center + C.radius
    if isinstance(C, Simplex):
        return np.zeros(C.dim), np.full(C.dim, C.scale)
    return z - 1.0, z + 1.0


def grid_search(problem, lam, resolution=1e-4, points=21, depth=16, z_hint=None):
    """Coarse-to-fine grid minimisation of the joint residual over ``C`` (d <= 2).

    Each level evaluates a ``points``-per-axis grid restricted to ``C`` and
    recentres a window four cells wide on the best point until the spacing
    drops below ``resolution``.
    """
    C = problem.C
    if C.dim > 2:
        raise ValueError("grid search is limited to d <= 2")
    depth = min(depth, problem.W.depth_cap)
    hint = np.zeros(C.dim) if z_hint is None else np.asarray(z_hint, dtype=float)
    lo, hi = _grid_window(C, hint)
    best, best_val = None, math.inf
    while True:
        axes = [np.linspace(lo[i], hi[i], points) for i in range(C.dim)]
        h = max(float(a[1] - a[0]) if a.size > 1 else 0.0 for a in axes)
        for p in np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, C.dim):
            if not C.contains(p):
                continue
            v = _merit(problem, p, lam, depth)
            if v < best_val:
                best, best_val = p, v
        if best is None:
            raise OracleError("grid contains no feasible point")
        if h <= resolution:
            return best, best_val
        lo, hi = best - 2 * h, best + 2 * h


def oracle_solve(problem, x0=None, cross_check=True, max_inner=10**7, stall=1e-13):
    """High-accuracy reference point of ``Fix(W) & VI(C, A)``.

    Alternates a small-step projected iteration ``z <- P_C(z - lam A z)`` with
    the fixed-point refinement ``z <- W_cap z``, each run until its step
    stalls, until both residuals are below ``1e-12``. On one- and
    two-dimensional problems the result is additionally compared against a
    grid search; the grid must not find a point with a smaller joint residual.
    """
    C, A, W = problem.C, problem.A, problem.W
    alpha = A.alpha if math.isfinite(A.alpha) else 1.0
    lam = 0.5 * min(alpha, 0.1)
    z = C.project(np.zeros(C.dim) if x0 is None else x0)
    depth = W.depth_cap
    total = 0

    def run(update):
        nonlocal z, total
        while True:
            z_new = update(z)
            total += 1
            step = float(np.linalg.norm(z_new - z))
            z = z_new
            if step <= stall * max(1.0, float(np.linalg.norm(z))):
                return
            if total >= max_inner:
                raise OracleError(f"no joint stall within {max_inner} inner steps (F may be empty)")

    for _ in range(10_000):
        z_round = z
        run(lambda v: C.project(v - lam * A._apply(v)))
        run(lambda v: _w_raw(W, depth, v))
        r_vi, r_fix = residual_vi(C, A, z, lam), residual_fix(W, z, depth)
        if r_vi <= 1e-12 and r_fix <= 1e-12:
            break
        if float(np.linalg.norm(z - z_round)) <= stall * max(1.0, float(np.linalg.norm(z))):
            raise OracleError(f"alternation is cycling with residuals {r_vi:.3e}, {r_fix:.3e} (F may be empty)")
    else:
        raise OracleError("alternation did not settle")

    if cross_check and C.dim <= 2:
        g, g_val = grid_search(problem, lam, z_hint=z)
        z_val = _merit(problem, z, lam, min(16, depth))
        if z_val > g_val + 1e-9:
            raise OracleError(f"grid search found a better point {g} ({g_val:.3e} < {z_val:.3e})")
    return z
