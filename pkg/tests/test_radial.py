import math

import numpy as np
import pytest

from hessokit import radial


def test_ball_volume_factor():
    assert radial.ball_volume_factor(1) == pytest.approx(math.pi)
    assert radial.ball_volume_factor(2) == pytest.approx(math.pi**2 / 2)


def test_quadratic_density_and_mass():
    # u = c|z|^2: chi = c t, density c^m, mass = c^m vol(B)
    for n in (1, 2, 3):
        for m in range(1, n + 1):
            c = 1.7
            dens = radial.radial_density(lambda t: c * np.ones_like(t), lambda t: 0 * t, 0.3, n, m)
            assert dens == pytest.approx(c**m)
            mass = radial.radial_total_mass(lambda t: c, 1.0, n, m)
            assert mass == pytest.approx(c**m * radial.ball_volume_factor(n))


def test_model_profiles_solve_homogeneous_equation():
    for n, m in [(2, 1), (3, 1), (3, 2), (2, 2), (3, 3)]:
        prof = radial.model_profile(n, m)
        ts = np.linspace(0.2, 2.0, 50)
        eps = 1e-6
        chi_pp = (prof.chi_p(ts + eps) - prof.chi_p(ts - eps)) / (2 * eps)
        dens = radial.radial_density(prof.chi_p, lambda t: chi_pp, ts, n, m)
        assert np.abs(dens).max() < 1e-7


def test_truncated_model_mass_values():
    assert radial.truncated_model_mass(2, 1) == pytest.approx(math.pi**2 / 2)
    assert radial.truncated_model_mass(2, 2) == pytest.approx(math.pi**2 / 8)


def test_extremal_profile_boundary_values():
    prof = radial.extremal_profile(2, 1, 0.5, 1.0)
    assert prof.chi(0.25) == pytest.approx(-1.0)
    assert prof.chi(1.0) == pytest.approx(0.0, abs=1e-12)
    assert prof.chi(0.5) < 0
    mono = np.diff(prof.chi(np.linspace(0.25, 1.0, 100)))
    assert (mono >= -1e-12).all()


def test_ball_capacity_monotonicity():
    # capacity grows with the marked ball and shrinks with the ambient ball
    for n, m in [(2, 1), (2, 2), (3, 2)]:
        c1 = radial.ball_capacity(n, m, 0.4, 1.0)
        c2 = radial.ball_capacity(n, m, 0.5, 1.0)
        c3 = radial.ball_capacity(n, m, 0.5, 1.5)
        assert 0 < c1 < c2
        assert c3 < c2


def test_ball_capacity_matches_extremal_flux():
    n, m, r, R = 2, 1, 0.5, 1.0
    prof = radial.extremal_profile(n, m, r, R)
    T = R**2
    flux_out = T**n * float(prof.chi_p(T)) ** m
    assert radial.ball_capacity(n, m, r, R) == pytest.approx(
        radial.ball_volume_factor(n) * flux_out
    )


def test_solve_radial_dirichlet_quadratic_exact():
    # f = c^m -> u = c|z|^2 + const
    n, m, c = 2, 2, 1.3
    sol = radial.solve_radial_dirichlet(lambda t: c**m * np.ones_like(t), n, m, T=1.0, boundary_value=c)
    ts = np.linspace(0.0, 1.0, 11)
    assert np.allclose(sol.chi(ts), c * ts, atol=1e-9)
    assert sol.total_mass() == pytest.approx(c**m * radial.ball_volume_factor(n), rel=1e-8)


def test_solve_radial_dirichlet_general_consistency():
    # reconstruct the density from the computed profile by differentiation
    n, m = 2, 1
    f = lambda t: 1.0 + t
    sol = radial.solve_radial_dirichlet(f, n, m, T=1.0)
    ts = np.linspace(0.05, 0.95, 19)
    eps = 1e-5
    chi_pp = (sol.chi_p(ts + eps) - sol.chi_p(ts - eps)) / (2 * eps)
    dens = radial.radial_density(sol.chi_p, lambda t: chi_pp, ts, n, m)
    assert np.allclose(dens, f(ts), atol=1e-4)


def test_solve_radial_rejects_negative_density():
    with pytest.raises(ValueError):
        radial.solve_radial_dirichlet(lambda t: t - 0.5, 2, 1, T=1.0)
