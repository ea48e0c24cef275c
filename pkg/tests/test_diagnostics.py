import numpy as np
import pytest
import yaml
from hypothesis import given, settings, strategies as st

from fixvi.diagnostics import (
    TRACE_HEADER, OracleError, Record, Trace, _fmt, fejer_check, grid_search, oracle_solve, read_trace_csv,
    residual_fix, residual_vi, trace_csv, write_trace,
)
from fixvi.operators import (
    Affine, Constant, GradientQuadratic, Identity, ProjectOnto, Scale, WMapping, Zero,
    ism_from_pseudocontraction,
)
from fixvi.problems import ProblemInstance, gen_quadratic_box
from fixvi.schemes import SchemeSpec, StopRule, run_scheme
from fixvi.sets import Ball, Box, Halfspace


def ident(d):
    return WMapping((Identity(d),))


def test_residual_vi_examples():
    assert residual_vi(Box.unit(2), Zero(2), [0.3, 0.9], 1.0) == 0.0
    C, A = Box.unit(1), Affine(np.eye(1))
    assert residual_vi(C, A, [0.0], 1.0) == 0.0
    assert residual_vi(C, A, [1.0], 1.0) == 1.0
    with pytest.raises(ValueError):
        residual_vi(C, A, [1.0], 0.0)


def test_residual_fix_examples():
    z = np.array([0.5, -0.5])
    W = WMapping((Scale(0.3, z), ProjectOnto(Ball(z, 1.0))))
    assert residual_fix(W, z) == 0.0
    W0 = WMapping((Constant([0.0, 0.0]),), mu=0.5)
    assert residual_fix(W0, [2.0, 0.0], depth=1) == 1.0
    assert residual_fix(ident(3), [4.0, -1.0, 2.5]) == 0.0


def _trace(xs):
    return Trace([Record(n, np.asarray(x, float), 0.0, 0.0) for n, x in enumerate(xs)])


def test_fejer_examples():
    z = np.array([1.0, 2.0])
    rep = fejer_check(_trace([z] * 5), z)
    assert rep.passed and np.all(rep.deltas == 0)
    p = gen_quadratic_box(2, seed=7)
    tr = run_scheme(SchemeSpec("karahan12"), p, [0.0, 1.0], StopRule(max_iter=5000))
    assert fejer_check(tr, p.oracle_hint).passed
    bad = _trace([z + 1.0, z + 0.5, z + 2.0, z])
    rep = fejer_check(bad, z)
    assert not rep.passed and rep.max_violation == pytest.approx(1.5 * np.sqrt(2))


def test_oracle_on_trivial_problem_returns_projection():
    p = ProblemInstance(Box.unit(2), Zero(2), ident(2))
    np.testing.assert_array_equal(oracle_solve(p, x0=[3.0, 0.4]), [1.0, 0.4])


def test_oracle_projection_problem():
    target = np.array([2.0, 0.5])
    p = ProblemInstance(Box.unit(2), GradientQuadratic(np.eye(2), -target), WMapping((ProjectOnto(Box.unit(2)),)))
    np.testing.assert_allclose(oracle_solve(p), [1.0, 0.5], atol=1e-10)


def test_oracle_pseudocontraction_reduction():
    A = ism_from_pseudocontraction(Scale(-1.0, [0.0, 0.0]), 0.0)
    p = ProblemInstance(Ball([0.0, 0.0], 1.0), A, ident(2))
    np.testing.assert_allclose(oracle_solve(p, x0=[0.6, -0.3]), [0.0, 0.0], atol=1e-10)


def test_oracle_detects_empty_solution_set():
    # Fix(W) = {x1 = 3} misses the VI solution set on the unit box
    W = WMapping((ProjectOnto(Halfspace([-1.0, 0.0], -3.0)),))
    p = ProblemInstance(Box.unit(2), Zero(2), W)
    with pytest.raises(OracleError):
        oracle_solve(p)


def test_grid_search_agrees_with_known_minimum():
    target = np.array([2.0, 0.5])
    p = ProblemInstance(Box.unit(2), GradientQuadratic(np.eye(2), -target), WMapping((ProjectOnto(Box.unit(2)),)))
    g, val = grid_search(p, 0.05)
    assert np.linalg.norm(g - [1.0, 0.5]) <= 1e-3 and val <= 1e-3


def test_trace_csv_format(tmp_path):
    tr = Trace([Record(0, np.zeros(1), 0.5238077781705528, 1e-9, None, 0),
                Record(1, np.zeros(1), 0.0, 123.25, 2.0, 4711)], terminated_by="Tolerance",
               config_echo={"seed": 3})
    text = trace_csv(tr)
    lines = text.split("\n")
    assert lines[0] == ",".join(TRACE_HEADER) == "n,residual_vi,residual_fix,dist_to_oracle,step_time_ns"
    assert "\r" not in text and text.endswith("\n")
    assert lines[1].split(",")[3] == ""
    for field in lines[1].split(",")[1:3] + lines[2].split(",")[1:4]:
        assert "e" not in field.lower()
        digits = field.lstrip("-").replace(".", "")
        if float(field) != 0:
            digits = digits.lstrip("0")
        assert len(digits) == 17  # significant digits
    path = tmp_path / "out" / "run.csv"
    write_trace(tr, path)
    assert path.read_text() == text
    echo = yaml.safe_load(path.with_suffix(".config.yaml").read_text())
    assert echo == {"seed": 3, "terminated_by": "Tolerance"}
    rows = read_trace_csv(path)
    assert float(rows[0]["residual_vi"]) == 0.5238077781705528
    assert not [p for p in path.parent.iterdir() if p.name.endswith(".tmp")]
    short = trace_csv(tr, include_timing=False)
    assert short.split("\n")[0] == "n,residual_vi,residual_fix,dist_to_oracle"


@settings(max_examples=200)
@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e30, max_value=1e30))
def test_decimal_format_roundtrips(v):
    s = _fmt(v)
    assert "e" not in s.lower()
    assert float(s) == v
