import numpy as np
import pytest

from hessokit.errors import StructuralError
from hessokit import fieldgrid as fg
from hessokit import gridio


def quad(z):
    return (np.abs(z) ** 2).sum(axis=-1)


@pytest.fixture(scope="module")
def ball2():
    return fg.ball_domain(2, radius=1.0, nodes=17)


@pytest.fixture(scope="module")
def metric2(ball2):
    return fg.standard_metric(ball2)


def test_domain_classification_invariants():
    for dom in (
        fg.ball_domain(1, nodes=21),
        fg.ball_domain(2, nodes=13),
        fg.polydisc_domain(2, radii=(1.0, 0.7), nodes=13),
        fg.box_domain(2, nodes=9),
    ):
        interior = dom.interior
        ok = dom.not_exterior
        for a in range(2 * dom.n):
            assert ok[np.roll(interior, 1, axis=a)].all()
            assert ok[np.roll(interior, -1, axis=a)].all()
        assert interior.any()


def test_ball_boundary_nodes_near_sphere():
    dom = fg.ball_domain(2, radius=1.0, nodes=17)
    h = max(dom.spacing)
    coords = dom.real_coords()
    r = np.sqrt((coords**2).sum(axis=-1))
    bd = r[dom.boundary]
    assert (np.abs(bd - 1.0) <= 2 * h * np.sqrt(2)).all()


def test_grid_function_construction_and_errors(ball2):
    u = fg.GridFunction.from_callable(ball2, quad)
    assert u.values.shape == ball2.shape
    bad = np.full(ball2.shape, np.nan)
    with pytest.raises(StructuralError):
        fg.GridFunction(ball2, bad)


def test_complex_hessian_of_quadratic_is_identity(ball2):
    u = fg.GridFunction.from_callable(ball2, quad)
    hess = fg.complex_hessian(u)
    assert hess.masked_out == 0
    mats = hess.at_valid()
    assert np.allclose(mats, np.eye(2), atol=1e-11)


def test_complex_hessian_pluriharmonic_vanishes(ball2):
    u = fg.GridFunction.from_callable(ball2, lambda z: np.real(z[..., 0] ** 2))
    hess = fg.complex_hessian(u)
    assert np.abs(hess.at_valid()).max() < 1e-11


def test_complex_hessian_mixed_product_oracle():
    # u = |z1|^2 |z2|^2 has u_11 = |z2|^2, u_22 = |z1|^2, u_12 = conj(z1) z2
    errs = []
    for nodes in (9, 17, 33):
        dom = fg.box_domain(2, halfwidth=1.0, nodes=nodes)
        z = dom.complex_coords()
        u = fg.GridFunction(dom, (np.abs(z[..., 0]) ** 2 * np.abs(z[..., 1]) ** 2))
        hess = fg.complex_hessian(u)
        want = np.zeros(dom.shape + (2, 2), dtype=complex)
        want[..., 0, 0] = np.abs(z[..., 1]) ** 2
        want[..., 1, 1] = np.abs(z[..., 0]) ** 2
        want[..., 0, 1] = np.conj(z[..., 0]) * z[..., 1]
        want[..., 1, 0] = np.conj(want[..., 0, 1])
        err = np.abs(hess.matrices - want)[hess.valid].max()
        errs.append(err)
    # quartic: exact under second-order stencils would be O(h^2); here the
    # mixed terms are products of exact linear factors, so errors stay tiny
    assert errs[-1] < 1e-10


def test_complex_hessian_linearity(ball2):
    u = fg.GridFunction.from_callable(ball2, quad)
    v = fg.GridFunction.from_callable(ball2, lambda z: np.real(z[..., 0] * np.conj(z[..., 1])))
    a, b = 2.0, -0.5
    lin = fg.GridFunction(ball2, a * u.values + b * v.values)
    h1 = fg.complex_hessian(lin).matrices
    h2 = a * fg.complex_hessian(u).matrices + b * fg.complex_hessian(v).matrices
    valid = fg.complex_hessian(lin).valid
    assert np.allclose(h1[valid], h2[valid], atol=1e-12)


def test_one_sided_fallback_region_recovers_quadratic():
    # a ball grid has staircase corners where the mixed stencil must fall back
    dom = fg.ball_domain(2, radius=1.0, nodes=15)
    z = dom.complex_coords()
    u = fg.GridFunction(dom, np.real(z[..., 0] * np.conj(z[..., 1])) + quad(z))
    hess = fg.complex_hessian(u)
    assert hess.masked_out == 0
    want = np.array([[1.0, 0.5], [0.5, 1.0]], dtype=complex)
    assert np.allclose(hess.at_valid(), want, atol=1e-9)


def test_is_m_omega_sh_examples(ball2, metric2):
    u = fg.GridFunction.from_callable(ball2, quad)
    assert fg.is_m_omega_sh(u, metric2, 1).ok
    assert fg.is_m_omega_sh(u, metric2, 2).ok
    neg = fg.GridFunction(ball2, -u.values)
    verdict = fg.is_m_omega_sh(neg, metric2, 1)
    assert not verdict.ok
    assert verdict.worst_margin < 0


def test_is_m_omega_sh_saddle_oracle(ball2, metric2):
    # u = x1^2 - y1^2 + eps |z|^2 is pluriharmonic plus eps: spectrum (eps, eps)
    eps = 0.1
    u = fg.GridFunction.from_callable(
        ball2, lambda z: np.real(z[..., 0] ** 2) + eps * quad(z)
    )
    assert fg.is_m_omega_sh(u, metric2, 1).ok
    assert fg.is_m_omega_sh(u, metric2, 2).ok
    down = fg.GridFunction.from_callable(
        ball2, lambda z: np.real(z[..., 0] ** 2) - eps * quad(z)
    )
    assert not fg.is_m_omega_sh(down, metric2, 2).ok


def test_alpha_shift_changes_verdict(ball2, metric2):
    u = fg.GridFunction.from_callable(ball2, lambda z: -0.5 * quad(z))
    assert not fg.is_m_omega_sh(u, metric2, 1).ok
    assert fg.is_m_omega_sh(u, metric2, 1, alpha=np.eye(2)).ok


def test_mollify_identity_and_uniform_rate(ball2):
    u = fg.GridFunction.from_callable(ball2, quad)
    assert np.array_equal(fg.mollify(u, 0.0).values, u.values)
    errs = []
    for delta in (4.0, 2.0, 1.0):
        m = fg.mollify(u, delta)
        errs.append(np.abs(m.values - u.values)[ball2.interior].max())
    assert errs[0] > errs[-1]
    # smooth case: mollification error O(delta^2 h^2 * |D2 u|) stays small
    assert errs[-1] < 0.05


def test_smooth_decreasing_schedule_contract(ball2, metric2):
    z2 = lambda z: np.maximum(quad(z) - 0.25, quad(z) / 2)
    u = fg.GridFunction.from_callable(ball2, z2)
    members = fg.smooth_decreasing_schedule(u, metric2, m=2, deltas=[3.0, 2.0, 1.0])
    assert len(members) == 3
    prev = None
    for g in members:
        assert (g.values >= u.values - 1e-12).all()
        assert fg.is_m_omega_sh(g, metric2, 2, tol=1e-6).ok
        if prev is not None:
            assert (prev.values >= g.values - 1e-12).all()
        prev = g


def test_schedule_delta_zero_is_identity(ball2, metric2):
    u = fg.GridFunction.from_callable(ball2, quad)
    members = fg.smooth_decreasing_schedule(u, metric2, m=1, deltas=[0.0])
    assert np.array_equal(members[0].values, u.values)


def test_schedule_requires_ball():
    dom = fg.box_domain(2, nodes=9)
    u = fg.GridFunction.from_callable(dom, quad)
    with pytest.raises(StructuralError):
        fg.smooth_decreasing_schedule(u, fg.standard_metric(dom), 1, [1.0])


def test_measure_torsion_standard_metric(ball2):
    t = fg.measure_torsion(fg.standard_metric(ball2))
    assert t.ddc_omega <= 1e-10
    assert t.domega_dcomega <= 1e-10


def test_measure_torsion_constant_nondiagonal():
    dom = fg.ball_domain(2, nodes=13)
    g = np.array([[2.0, 0.3 + 0.1j], [0.3 - 0.1j, 1.0]])
    t = fg.measure_torsion(fg.constant_metric(dom, g))
    assert t.max() <= 1e-10


def test_measure_torsion_conformal_oracle():
    # omega = e^{x1} beta in n=2: dd^c omega / omega^2 = e^{-x1}/8 pointwise,
    # so the measured sup must match the symbolic bound over interior nodes
    ratios = []
    for nodes in (13, 25):
        dom = fg.ball_domain(2, radius=1.0, nodes=nodes)
        t = fg.measure_torsion(fg.conformal_metric(dom, 1.0))
        x1 = dom.real_coords()[..., 0]
        want = np.exp(-x1[dom.interior]).max() / 8.0
        ratios.append(t.ddc_omega / want)
    # face-adjacent nodes make the estimate O(h): stable and tightening
    assert ratios[0] == pytest.approx(1.0, rel=0.06)
    assert ratios[1] == pytest.approx(1.0, rel=0.03)
    assert abs(ratios[1] - 1.0) < abs(ratios[0] - 1.0)


def test_torsion_n3_kahler_vanishes():
    dom = fg.ball_domain(3, radius=1.0, nodes=7)
    t = fg.measure_torsion(fg.standard_metric(dom))
    assert t.max() <= 1e-10


def test_grid_csv_roundtrip(tmp_path, ball2):
    u = fg.GridFunction.from_callable(ball2, lambda z: np.sin(np.real(z[..., 0])) + quad(z))
    p = tmp_path / "u.csv"
    gridio.save_grid_csv(u, p)
    back = gridio.load_grid_csv(p)
    assert back.domain.meta() == ball2.meta()
    sel = ball2.not_exterior
    assert np.array_equal(back.values[sel], u.values[sel])


def test_container_roundtrip(tmp_path, ball2):
    u = fg.GridFunction.from_callable(ball2, quad)
    p = tmp_path / "u.hgrid"
    gridio.save_container(p, ball2, {"values": u.values, "mask": ball2.mask})
    dom, arrays = gridio.load_container(p)
    assert dom.meta() == ball2.meta()
    assert np.array_equal(arrays["values"], u.values)
    assert np.array_equal(arrays["mask"], ball2.mask)
    assert p.read_bytes()[:16] == gridio.MAGIC
    assert len(gridio.MAGIC) == 16
