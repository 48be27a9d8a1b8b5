import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pttalbot import grid as g
from pttalbot.errors import GridMismatch, TruncationInadequate, UnderResolved

A = 2 * np.pi


def analytic_one_ss(n, a=A, rho=1.0):
    if n < 1:
        return 0.0
    return 2 * (2 * np.pi / a) ** 2 * (-1) ** (n - 1) * n * np.exp(-2 * rho * n)


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        g.Grid(A, 100)
    with pytest.raises(ValueError):
        g.Grid(A, 32)


def test_one_ss_coefficients_match_closed_form():
    pot = g.one_singularity(A, 1.0)
    for n in range(-5, 12):
        assert abs(pot.coeff(n) - analytic_one_ss(n)) < 1e-12
    assert pot.coeff(1) == pytest.approx(0.270670566, abs=1e-9)
    assert pot.coeff(2) == pytest.approx(-0.0732625556, abs=1e-9)


def test_quadrature_oracle():
    # independent adaptive quadrature of the closed-form profile
    for a, rho in [(A, 1.0), (3.0, 0.7)]:
        pot = g.one_singularity(a, rho)
        f = lambda x, n: g.one_singularity_profile(np.array([x]), a, rho)[0] * np.exp(-2j * np.pi * n * x / a)
        for n in (1, 2, 3, -1):
            re = quad(lambda x: f(x, n).real, 0, a, limit=200)[0] / a
            im = quad(lambda x: f(x, n).imag, 0, a, limit=200)[0] / a
            assert abs(pot.coeff(n) - (re + 1j * im)) < 1e-10


def test_closed_form_values_at_origin():
    v1 = g.one_singularity(A, 1.0)(np.array([0.0]))[0]
    v2 = g.two_singularity(A, 1.0)(np.array([0.0]))[0]
    assert abs(v1 - 1 / (1 + np.cosh(2))) < 1e-12
    assert abs(v2 - (4 / (1 - np.cosh(4)) + 2 / (1 + np.cosh(2)))) < 1e-12
    assert v1.real == pytest.approx(0.209987, abs=1e-6)
    assert v2.real == pytest.approx(0.267931, abs=1e-6)


def test_families_are_one_sided_and_pt():
    for pot in (g.one_singularity(), g.two_singularity(), g.exp_potential(1.0)):
        assert pot.is_one_sided(1e-15)
        assert g.check_pt_symmetry(pot)
    # V0 sin x: Hermitian, odd about the origin
    assert not g.mathieu(1.0).is_one_sided()
    assert not g.check_pt_symmetry(g.mathieu(1.0))


def test_mathieu_is_sine():
    pot = g.mathieu(2.0)
    x = np.linspace(0, A, 17)
    assert np.allclose(pot(x), 2.0 * np.sin(x), atol=1e-14)


def test_rho_zero_rejected():
    with pytest.raises(ValueError):
        g.one_singularity(A, 0.0)
    with pytest.raises(ValueError):
        g.two_singularity(A, 0.0)


def test_slow_decay_is_flagged():
    with pytest.raises(TruncationInadequate):
        g.one_singularity(A, 1.0, n_max=12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(-3.0, 3.0))
def test_pt_predicate_under_scaling(scale, phase):
    pot = g.one_singularity(A, 1.0).scaled(scale)
    assert g.check_pt_symmetry(pot)
    twisted = g.ComplexPotential(pot.period, pot.coeffs * np.exp(1j * (phase if abs(phase) > 0.1 else 1.0)),
                                 g.Family.CUSTOM)
    assert not g.check_pt_symmetry(twisted)


def _random_field(rng, N=3, n=20):
    amp = rng.normal(size=2 * n + 1) + 1j * rng.normal(size=2 * n + 1)
    return g.Wavefield(N * A, amp, -n)


def test_modes_samples_round_trip():
    rng = np.random.default_rng(0)
    f = _random_field(rng)
    grid = g.Grid(f.period, 128)
    back = g.to_modes(g.to_samples(f, grid), grid)
    assert f.distance2(back) < 1e-24 * f.power + 1e-24


def test_parseval():
    rng = np.random.default_rng(1)
    f = _random_field(rng)
    grid = g.Grid(f.period, 256)
    assert g.mean_square(g.to_samples(f, grid)) == pytest.approx(f.power, rel=1e-12)


def test_under_resolved_and_mismatch():
    f = _random_field(np.random.default_rng(2), n=40)
    with pytest.raises(UnderResolved):
        g.to_samples(f, g.Grid(f.period, 64))
    with pytest.raises(GridMismatch):
        g.to_samples(f, g.Grid(2 * f.period, 256))


def test_spectral_derivative_of_sine():
    grid = g.Grid(A, 64)
    d = g.spectral_derivative(np.sin(3 * grid.x), A, 1)
    assert np.allclose(d, 3 * np.cos(3 * grid.x), atol=1e-12)
