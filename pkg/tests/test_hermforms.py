import math

import numpy as np
import pytest

from hessokit.errors import StructuralError
from hessokit import hermforms as hf
from hessokit import symcone as sc


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_spd(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a @ a.conj().T + 0.5 * np.eye(n)


def test_hermitian_form_validation():
    hf.HermitianForm(np.eye(3))
    with pytest.raises(StructuralError):
        hf.HermitianForm(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(StructuralError):
        hf.HermitianForm(np.zeros((2, 3)))


def test_metric_point_requires_positive_definite():
    with pytest.raises(StructuralError):
        hf.MetricPoint(hf.HermitianForm(np.diag([1.0, -1.0])))
    with pytest.raises(StructuralError):
        hf.MetricPoint(hf.HermitianForm(np.eye(2)), torsion_bound=-1.0)


def test_relative_eigenvalues_identity_cases():
    g = hf.identity_metric(3)
    lam = hf.relative_eigenvalues(np.eye(3), g)
    assert lam.values == pytest.approx((1.0, 1.0, 1.0))
    lam = hf.relative_eigenvalues(2 * np.eye(3), g)
    assert lam.values == pytest.approx((2.0, 2.0, 2.0))
    lam = hf.relative_eigenvalues(np.diag([3.0, 1.0]), hf.identity_metric(2))
    assert lam.values == pytest.approx((3.0, 1.0))


def test_relative_eigenvalues_pencil_scaling():
    rng = np.random.default_rng(0)
    g = random_spd(rng, 3)
    metric = hf.MetricPoint(hf.HermitianForm(g))
    lam = hf.relative_eigenvalues(2 * g, metric)
    assert lam.values == pytest.approx((2.0, 2.0, 2.0))


def test_relative_eigenvalues_congruence_invariance():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = rng.integers(2, 5)
        gamma = random_hermitian(rng, n)
        g = random_spd(rng, n)
        p = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        lam1 = hf.relative_eigenvalues(gamma, hf.MetricPoint(hf.HermitianForm(g)))
        gamma2 = p.conj().T @ gamma @ p
        g2 = p.conj().T @ g @ p
        lam2 = hf.relative_eigenvalues(gamma2, hf.MetricPoint(hf.HermitianForm(g2)))
        scale = max(1.0, max(abs(v) for v in lam1.values))
        assert np.allclose(lam1.as_array(), lam2.as_array(), atol=1e-9 * scale)


def test_form_in_cone_examples():
    g = hf.identity_metric(3)
    assert hf.form_in_cone(np.eye(3), g, m=2)
    assert not hf.form_in_cone(np.diag([1.0, 1.0, -1.0]), g, m=2)
    assert hf.form_in_cone(np.diag([2.0, 1.0, -0.5]), g, m=2)


def test_mixed_discriminant_identity_and_det():
    assert hf.mixed_discriminant([np.eye(3)] * 3) == pytest.approx(1.0)
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        a = random_hermitian(rng, n)
        det = np.linalg.det(a).real
        assert hf.mixed_discriminant([a] * n) == pytest.approx(det, rel=1e-10, abs=1e-12)


def test_mixed_discriminant_two_by_two_closed_form():
    rng = np.random.default_rng(4)
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    expect = (np.trace(a) * np.trace(b) - np.trace(a @ b)).real / 2
    assert hf.mixed_discriminant([a, b]) == pytest.approx(expect, rel=1e-12)


def test_mixed_discriminant_symmetry_and_multilinearity():
    rng = np.random.default_rng(5)
    n = 3
    a, b, c = (random_hermitian(rng, n) for _ in range(3))
    d1 = hf.mixed_discriminant([a, b, c])
    d2 = hf.mixed_discriminant([c, a, b])
    assert d1 == pytest.approx(d2, rel=1e-12, abs=1e-14)
    d3 = hf.mixed_discriminant([2.5 * a, b, c])
    assert d3 == pytest.approx(2.5 * d1, rel=1e-12, abs=1e-14)
    d4 = hf.mixed_discriminant([a + c, b, c])
    assert d4 == pytest.approx(d1 + hf.mixed_discriminant([c, b, c]), rel=1e-10, abs=1e-12)


def test_mixed_discriminant_input_errors():
    with pytest.raises(StructuralError):
        hf.mixed_discriminant([np.eye(2)])
    with pytest.raises(StructuralError):
        hf.mixed_discriminant([np.eye(6)] * 6)


def test_wedge_ratio_metric_is_one():
    rng = np.random.default_rng(6)
    g = random_spd(rng, 3)
    metric = hf.MetricPoint(hf.HermitianForm(g))
    for k in (1, 2, 3):
        assert hf.wedge_ratio([g] * k, metric) == pytest.approx(1.0, rel=1e-12)


def test_wedge_ratio_matches_symmetric_polynomial():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        metric_mat = random_spd(rng, n)
        metric = hf.MetricPoint(hf.HermitianForm(metric_mat))
        gamma = random_hermitian(rng, n)
        lam = hf.relative_eigenvalues(gamma, metric).as_array()
        for m in range(1, n + 1):
            want = sc.elem_sym(lam, m) / math.comb(n, m)
            got = hf.wedge_ratio([gamma] * m, metric)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-11)


def test_wedge_ratio_full_degree_is_relative_determinant():
    rng = np.random.default_rng(8)
    n = 3
    g = random_spd(rng, n)
    a = random_hermitian(rng, n)
    metric = hf.MetricPoint(hf.HermitianForm(g))
    want = (np.linalg.det(a) / np.linalg.det(g)).real
    assert hf.wedge_ratio([a] * n, metric) == pytest.approx(want, rel=1e-10)


def test_garding_positivity_metric_forms():
    metric = hf.identity_metric(3)
    rep = hf.garding_mixed_positivity([np.eye(3)] * 2, metric, m=2)
    assert rep["margin"] == pytest.approx(1.0)


def test_garding_positivity_random_cone_pairs():
    rng = np.random.default_rng(9)
    n, m = 3, 2
    metric = hf.identity_metric(n)
    idx = sc.ConeIndex(n, m)
    count = 0
    while count < 60:
        a = random_hermitian(rng, n) + 1.2 * np.eye(n)
        b = random_hermitian(rng, n) + 1.2 * np.eye(n)
        if hf.form_in_cone(a, metric, m) and hf.form_in_cone(b, metric, m):
            rep = hf.garding_mixed_positivity([a, b], metric, m)
            assert rep["margin"] >= -1e-10
            count += 1
    del idx


def test_garding_positivity_boundary_form():
    # spectrum (1, eps, eps) has S_2 ~ 2 eps: just inside the m = 2 boundary,
    # so the smallest padded ratio must sit at ~0 from above
    metric = hf.identity_metric(3)
    a = np.diag([1.0, 1e-9, 1e-9])
    rep = hf.garding_mixed_positivity([a, np.eye(3)], metric, m=2)
    assert rep["margin"] >= -1e-12
    assert rep["margin"] == pytest.approx(0.0, abs=1e-6)


def test_garding_rejects_noncone_form():
    metric = hf.identity_metric(3)
    with pytest.raises(StructuralError):
        hf.garding_mixed_positivity([np.diag([1.0, 1.0, -1.0])], metric, m=2)


def test_char_poly_elem_sym_matches_eigenpath():
    rng = np.random.default_rng(10)
    for n in (1, 2, 3):
        mats = np.stack([random_hermitian(rng, n) for _ in range(40)])
        s = hf.char_poly_elem_sym(mats, n)
        lam = np.linalg.eigvalsh(mats)
        want = sc.elem_sym_all(lam, n)
        assert np.allclose(s, want, rtol=1e-10, atol=1e-10)
