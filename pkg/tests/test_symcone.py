import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hessokit.errors import ConeError
from hessokit import symcone as sc


def test_elem_sym_basic_values():
    assert sc.elem_sym([1, 1, 1], 2) == 3
    assert sc.elem_sym([3, 2, 1], 2) == 11
    assert sc.elem_sym([5, -1], 3) == 0.0
    assert sc.elem_sym([5, -1], -2) == 0.0
    assert sc.elem_sym([5, -1], 0) == 1.0


@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=10),
    st.integers(min_value=0, max_value=10),
)
@settings(max_examples=200, deadline=None)
def test_elem_sym_recurrence_matches_enumeration(vals, k):
    got = sc.elem_sym(vals, k)
    want = sc.elem_sym_enumerate(vals, k)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_elem_sym_all_batch_shape():
    arr = np.arange(12.0).reshape(3, 4)
    out = sc.elem_sym_all(arr, 4)
    assert out.shape == (3, 5)
    for row, srow in zip(arr, out):
        for k in range(5):
            assert srow[k] == pytest.approx(sc.elem_sym_enumerate(row, k), rel=1e-12)


def test_elem_sym_restricted_examples():
    assert sc.elem_sym_restricted([3, 2, 1], 1, {1}) == 3
    assert sc.elem_sym_restricted([3, 2, 1], 2, {3}) == 6
    assert sc.elem_sym_restricted([9, -4, 7], 0, {2}) == 1.0
    with pytest.raises(ValueError):
        sc.elem_sym_restricted([3, 2, 1], 1, {0})
    with pytest.raises(ValueError):
        sc.elem_sym_restricted([3, 2, 1], 1, {4})
    with pytest.raises(ValueError):
        sc.elem_sym_restricted([3, 2, 1], 1, [1, 1])


def test_in_gamma_m_examples():
    assert sc.in_gamma_m([2, 1, -0.5], sc.ConeIndex(3, 2))
    assert not sc.in_gamma_m([1, 1, -1], sc.ConeIndex(3, 2))
    for n in range(1, 7):
        for m in range(1, n + 1):
            assert sc.in_gamma_m([1.0] * n, sc.ConeIndex(n, m))


def test_in_gamma_m_literal_test_at_zero_tol():
    # S_2 = 0 exactly: open-cone test must fail
    assert not sc.in_gamma_m([1.0, 0.0], sc.ConeIndex(2, 2), tol=0.0)
    assert sc.in_gamma_m([1.0, 1e-30], sc.ConeIndex(2, 2), tol=0.0)


@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6),
    st.floats(0.01, 100.0),
)
@settings(max_examples=200, deadline=None)
def test_gamma_m_is_a_cone_under_scaling(vals, t):
    n = len(vals)
    for m in range(1, n + 1):
        idx = sc.ConeIndex(n, m)
        if sc.in_gamma_m(vals, idx, tol=1e-12):
            scaled = [t * v for v in vals]
            assert sc.in_gamma_m(scaled, idx, tol=0.0)


def test_gamma_m_monotone_in_order():
    rng = np.random.default_rng(5)
    pts = rng.normal(1.0, 1.5, size=(500, 5))
    for n_m in range(5, 0, -1):
        idx = sc.ConeIndex(5, n_m)
        inside = sc.in_gamma_m_batch(pts, idx, tol=0.0)
        for m2 in range(1, n_m):
            weaker = sc.in_gamma_m_batch(pts, sc.ConeIndex(5, m2), tol=0.0)
            assert np.all(weaker[inside])


def test_c_m_constant_values():
    assert sc.c_m_constant(sc.ConeIndex(3, 2)) == pytest.approx(1 / 3)
    assert sc.c_m_constant(sc.ConeIndex(5, 1)) == 0.0
    assert sc.c_m_constant(sc.ConeIndex(4, 4)) == pytest.approx(3 / 8)
    for n in range(1, 9):
        for m in range(1, n + 1):
            cm = sc.c_m_constant(sc.ConeIndex(n, m))
            assert 0 <= cm < 1


def test_ivochkina_symmetric_point_passes():
    for n in range(1, 6):
        for m in range(1, n + 1):
            rep = sc.ivochkina_checks([1.0] * n, sc.ConeIndex(n, m))
            assert rep.passed


def test_ivochkina_example_point():
    rep = sc.ivochkina_checks([2, 1, -0.5], sc.ConeIndex(3, 2))
    assert rep.passed
    by_name = {i.name: i for i in rep.items}
    assert by_name["lambda_m_positive"].worst_margin == pytest.approx(1.0)


def test_ivochkina_rejects_noncone_point():
    with pytest.raises(ConeError):
        sc.ivochkina_checks([1, 1, -1], sc.ConeIndex(3, 2))


def test_lemma22a_symmetric_point():
    rep = sc.lemma22a_check([1.0, 1.0, 1.0], sc.ConeIndex(3, 2), i=1)
    assert rep.left == pytest.approx(1.0)
    assert rep.right == pytest.approx(math.sqrt(3) * math.sqrt(2 * 3))
    assert rep.slack >= 0
    assert rep.passed


def test_lemma22a_index_range():
    with pytest.raises(ValueError):
        sc.lemma22a_check([1.0, 1.0, 1.0], sc.ConeIndex(3, 2), i=2)


def test_lemma22a_boundary_ray_nonnegative_slack():
    # lambda_m -> 0+ along a ray: slack must stay nonnegative
    for eps in [1e-1, 1e-3, 1e-6, 1e-9]:
        lam = [2.0, 1.0, eps, -0.2 * eps]
        idx = sc.ConeIndex(4, 3)
        if sc.in_gamma_m(lam, idx, tol=0.0):
            rep = sc.lemma22a_check(lam, idx, i=2)
            assert rep.slack >= -1e-9 * rep.scale


def test_key_inequality_example_points():
    rep = sc.key_inequality_check([1.0, 1.0, 1.0], sc.ConeIndex(3, 2))
    assert rep["passed"]
    rep = sc.key_inequality_check([2, 1, -0.5], sc.ConeIndex(3, 2))
    assert rep["main"].slack >= 0
    assert rep["passed"]


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=8))
@settings(max_examples=300, deadline=None)
def test_newton_inequality_everywhere(vals):
    n = len(vals)
    for k in range(1, n):
        rep = sc.newton_inequality_check(vals, k)
        assert rep.passed


def test_theta_identity_case_exact():
    for n in range(1, 7):
        est = sc.estimate_theta_lemma21(sc.ConeIndex(n, n), budget=200, seed=3)
        assert est.part_a == 1.0
        assert est.value == 1.0


def test_theta_m1_converges_to_reciprocal_dimension():
    for n in (2, 3, 6):
        est = sc.estimate_theta_lemma21(sc.ConeIndex(n, 1), budget=20_000, seed=11)
        assert abs(est.value - 1.0 / n) <= 1e-3
        assert est.value > 0


def test_theta_positive_and_reproducible():
    idx = sc.ConeIndex(3, 2)
    a = sc.estimate_theta_lemma21(idx, budget=5000, seed=42)
    b = sc.estimate_theta_lemma21(idx, budget=5000, seed=42)
    assert a.value == b.value
    assert a.value > 0


def test_lin_trudinger_symmetric_ratio():
    n, m = 5, 3
    idx = sc.ConeIndex(n, m)
    ratio = math.comb(n - 1, m - 1) / math.comb(n, m - 1)
    assert sc.lin_trudinger_check([1.0] * n, idx, theta=ratio * 0.999999)
    assert not sc.lin_trudinger_check([1.0] * n, idx, theta=ratio * 1.5)


def test_lin_trudinger_m1_trivial():
    idx = sc.ConeIndex(4, 1)
    assert sc.lin_trudinger_check([3.0, 1.0, -0.5, -0.2], idx, theta=1.0)
    assert sc.lin_trudinger_theta(idx, budget=500, seed=1) == pytest.approx(1.0)


def test_lin_trudinger_empirical_theta_positive():
    for n in (3, 4, 5):
        for m in range(2, n + 1):
            th = sc.lin_trudinger_theta(sc.ConeIndex(n, m), budget=2000, seed=7)
            assert th > 0


@pytest.mark.parametrize("generator", ["shifted-gaussian", "boundary-biased", "dirichlet-simplex"])
def test_samplers_stay_in_cone(generator):
    idx = sc.ConeIndex(4, 2)
    pts = sc.sample_cone(idx, 2000, seed=9, generator=generator)
    assert pts.shape == (2000, 4)
    assert sc.in_gamma_m_batch(pts, idx, tol=0.0).all()


def test_boundary_biased_sampler_stresses_the_boundary():
    idx = sc.ConeIndex(3, 2)
    pts = sc.sample_cone(idx, 4000, seed=2, generator="boundary-biased")
    s = sc.elem_sym_all(np.sort(pts, axis=1)[:, ::-1], 2)
    scale = sc.elem_sym_all(np.abs(pts), 2)
    rel = (s[:, 1:] / np.maximum(scale[:, 1:], 1e-300)).min(axis=1)
    assert (rel < 1e-4).mean() > 0.2  # a fifth of samples hug the boundary


def test_cone_sample_invariant():
    samples = sc.cone_samples(sc.ConeIndex(3, 2), 10, seed=4)
    for s in samples:
        s.check(sc.ConeIndex(3, 2))


def test_fuzz_small_battery_all_pass():
    for n in range(2, 5):
        for m in range(1, n + 1):
            rep = sc.fuzz_cone_inequalities(sc.ConeIndex(n, m), samples=3000, seed=1)
            assert rep.passed, rep.as_dict()


def test_fuzz_report_reproducible_across_chunking():
    idx = sc.ConeIndex(3, 2)
    a = sc.fuzz_cone_inequalities(idx, samples=4000, seed=5, chunk=1000)
    b = sc.fuzz_cone_inequalities(idx, samples=4000, seed=5, chunk=1000)
    assert a.as_dict() == b.as_dict()
