import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fixvi.core import make_rng
from fixvi.operators import CertificationError, Identity, Linear, Scale, certify_ism, verify_nonexpansive
from fixvi.problems import (
    certify_instance, gen_common_fixed_family, gen_contraction_speed, gen_pseudocontractive,
    gen_quadratic_box, iterations_to_tol, pseudocontraction_matrix, speed_comparison,
)
from fixvi.schemes import SchemeSpec, StopRule, run_scheme, step_picard


@pytest.mark.parametrize("Q, c, expected", [
    ([[1.0]], [-2.0], [1.0]),
    ([[1.0]], [0.0], [0.0]),
    ([[1.0, 0.0], [0.0, 1.0]], [-4.0, -1.0], [1.0, 1.0]),
])
def test_quadratic_box_examples(Q, c, expected):
    p = gen_quadratic_box(len(c), 0, Q=np.array(Q), c=np.array(c))
    np.testing.assert_allclose(p.oracle_hint, expected, atol=1e-10)
    assert p.generator is None


def test_quadratic_box_oracle_satisfies_kkt():
    # at the box minimiser every gradient component points outward or vanishes
    for seed in range(5):
        p = gen_quadratic_box(4, seed)
        z, g = p.oracle_hint, p.A(p.oracle_hint)
        for zi, gi in zip(z, g):
            if 1e-9 < zi < 1 - 1e-9:
                assert abs(gi) <= 1e-9
            elif zi <= 1e-9:
                assert gi >= -1e-9
            else:
                assert gi <= 1e-9


def test_quadratic_box_is_seed_deterministic():
    a, b = gen_quadratic_box(3, 11), gen_quadratic_box(3, 11)
    np.testing.assert_array_equal(a.extra["Q"], b.extra["Q"])
    np.testing.assert_array_equal(a.x0, b.x0)
    assert a.to_record() == {"generator": "quadratic_box", "d": 3, "seed": 11}
    ev = np.linalg.eigvalsh(a.extra["Q"])
    assert ev.min() >= 0.5 - 1e-12 and ev.max() <= 2 + 1e-12


def test_common_fixed_family_examples():
    p = gen_common_fixed_family(2, 1, 0, sigmas=[0.5], z_star=[1.0, 0.0])
    np.testing.assert_allclose(p.oracle_hint, [1.0, 0.0])
    p = gen_common_fixed_family(3, 6, 2, sigmas=0.7)
    assert np.all(p.extra["sigmas"] == 0.7)
    for T in p.W.family:
        np.testing.assert_allclose(T(p.oracle_hint), p.oracle_hint, atol=1e-15)
    gen_common_fixed_family(4, 3, 5)  # mixed sigmas; the generator checks the oracle within 1e-10


def test_common_fixed_family_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_common_fixed_family(21, 3, 0)
    with pytest.raises(ValueError):
        gen_common_fixed_family(2, 0, 0)
    with pytest.raises(ValueError):
        gen_common_fixed_family(2, 2, 0, z_star=[3.0, 0.0])


def test_pseudocontractive_examples():
    p = gen_pseudocontractive(2, 0.0, 0, S=Scale(-1.0, [0.0, 0.0]))
    np.testing.assert_allclose(p.A([1.0, 2.0]), [2.0, 4.0])
    np.testing.assert_allclose(p.oracle_hint, [0.0, 0.0], atol=1e-10)
    assert p.lam_corridor == (0.0, 1.0) and 2 * p.A.alpha == 1.0
    p = gen_pseudocontractive(2, 0.0, 0, S=Identity(2))
    np.testing.assert_array_equal(p.A([3.0, 1.0]), [0.0, 0.0])
    assert p.C.contains(p.oracle_hint)


@pytest.mark.parametrize("k", [0.0, 0.25, 0.6])
def test_pseudocontractive_corridor_matches_two_alpha(k):
    p = gen_pseudocontractive(3, k, 1)
    assert p.lam_corridor[1] == pytest.approx(1.0 - k) == pytest.approx(2 * p.A.alpha)
    assert certify_ism(p.A) >= p.A.alpha - 1e-8


def test_pseudocontraction_matrix_attains_the_extreme_eigenvalue():
    k = 0.4
    M = pseudocontraction_matrix(4, k, make_rng(0))
    ev = np.linalg.eigvalsh(M)
    assert ev[0] == pytest.approx(-(1 + k) / (1 - k))
    assert ev[-1] <= 0.5
    with pytest.raises(CertificationError):
        gen_pseudocontractive(2, 0.0, 0, S=Linear(np.diag([-3.0, 0.0])))


def test_contraction_speed_examples():
    T = Scale(0.5, [0.0])
    n, _ = iterations_to_tol(lambda s: step_picard(s, T), [1.0], [0.0])
    assert n == math.ceil(math.log(1e-8) / math.log(0.5)) == 27
    out = speed_comparison(T, [0.0], x0=[1.0], alpha=0.5)
    assert out["picard"] == 27
    assert out["khan_factor"] == pytest.approx(0.375, abs=1e-15)
    assert out["khan"] == math.ceil(math.log(1e-8) / math.log(0.375)) == 19
    zero = speed_comparison(T, [0.0], x0=[0.0])
    assert all(zero[k] == 0 for k in ("picard", "mann", "khan", "karahan12"))


def test_contraction_speed_generator_range():
    for seed in range(20):
        T, z = gen_contraction_speed(seed)
        assert 0.5 <= T.factor <= 0.95
        np.testing.assert_allclose(T(z), z, atol=1e-15)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6))
def test_generated_instances_are_certified(seed, d):
    for p in (gen_quadratic_box(d, seed), gen_common_fixed_family(d, 4, seed)):
        certify_instance(p, rng=seed % 1000, pairs=2000)
        assert all(verify_nonexpansive(T, pairs=500) for T in p.W.family)
        assert p.C.contains(p.oracle_hint) and p.C.contains(p.x0)


def test_pseudocontractive_run_converges():
    p = gen_pseudocontractive(4, 0.3, 1)
    tr = run_scheme(SchemeSpec("karahan12"), p, p.x0, StopRule(max_iter=20_000), oracle=p.oracle_hint)
    assert tr.converged and tr.final.dist_to_oracle <= 1e-6
