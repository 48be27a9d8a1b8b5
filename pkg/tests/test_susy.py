from fractions import Fraction

import numpy as np
import pytest

from pttalbot import bands as b
from pttalbot import grid as g
from pttalbot import susy as s
from pttalbot.errors import NotDefective, SeedNotSolution, SeedVanishes

A = 2 * np.pi


@pytest.fixture(scope="module")
def steps():
    return s.cascade(A, 1.0)


def test_first_step_reproduces_one_ss(steps):
    first = steps[0]
    grid = g.Grid(A, 512)
    closed = g.one_singularity_profile(grid.x, A, 1.0)
    assert np.max(np.abs(first.output_samples - closed)) < 1e-10
    assert np.max(np.abs(g.potential_samples(first.output_potential, grid) - closed)) < 1e-10


def test_second_step_reproduces_two_ss(steps):
    grid = g.Grid(A, 512)
    closed = g.two_singularity_profile(grid.x, A, 1.0)
    assert np.max(np.abs(steps[1].output_samples - closed)) < 1e-10
    pot = s.synthesize_two_singularities(A, 1.0)
    assert pot.form_tag is g.Family.TWO_SS
    assert np.max(np.abs(g.potential_samples(pot, grid) - closed)) < 1e-10


def test_superpotentials(steps):
    first, second = steps
    assert first.superpotential[0] == pytest.approx(-0.5j * np.tanh(1.0), abs=1e-12)
    assert abs(first.superpotential[0] + 0.380797j) < 1e-6
    x = first.grid.x
    assert np.max(np.abs(first.superpotential - s.first_superpotential(x, A, 1.0))) < 1e-10
    assert np.max(np.abs(second.superpotential - s.second_superpotential(x, A, 1.0))) < 1e-10


def test_plane_wave_seed_is_trivial():
    step = s.darboux_partner(g.free_space(A), s.plane_wave_seed(0.5, 2 * A))
    assert np.max(np.abs(step.output_samples)) < 1e-10
    assert np.allclose(step.superpotential, 0.5j)


def test_rho_zero_rejected():
    with pytest.raises(SeedVanishes):
        s.cascade(A, 0.0)
    with pytest.raises(SeedVanishes):
        s.darboux_partner(g.free_space(A), s.cosine_seed(A, 0.0))


def test_wrong_seed_rejected():
    bad = s.SeedSolution(lambda x: np.cos(0.5 * x + 1j), 0.3, 2 * A)
    with pytest.raises(SeedNotSolution):
        s.darboux_partner(g.free_space(A), bad)


def test_pt_preserved(steps):
    for st in steps:
        assert g.check_pt_symmetry(st.output_potential)
    assert g.check_pt_symmetry(s.synthesize_two_singularities(A, 2.0))


def test_rho_two_census():
    pot = s.synthesize_two_singularities(A, 2.0)
    assert b.detect_singularities(pot, 6).defective_levels == [1, 3]


def _bloch_field(vec, q, n_trunc, keep=60):
    amp = np.asarray(vec)[n_trunc - keep:n_trunc + keep + 1]
    return g.Wavefield(A, amp, -keep, Fraction(q * A / (2 * np.pi)).limit_denominator(10 ** 6))


def _derivative(f):
    return f.replace(1j * f.wavenumbers * f.amplitudes)


def test_factorization_identity(steps):
    rng = np.random.default_rng(3)
    grid = g.Grid(A, 512)
    for st in steps:
        w = g.potential_samples(st.superpotential_series, grid)
        v_out = g.potential_samples(st.output_potential, grid)
        for _ in range(20):
            q = float(rng.uniform(-0.45, 0.45))
            blk = b.bloch_matrix(st.output_potential, q)
            ev, vecs = np.linalg.eig(blk.matrix)
            k = int(rng.integers(0, 5))
            idx = np.argsort(ev.real)[k]
            psi = _bloch_field(vecs[:, idx], blk.q, blk.n_trunc)
            psi = psi.replace(psi.amplitudes / np.sqrt(psi.power))
            p = g.to_samples(psi, grid)
            bpsi = g.to_samples(_derivative(psi), grid) + w * p            # (d + W) psi
            chi = g.to_modes(bpsi, grid, psi.tilt, A).trimmed(1e-14)
            lhs = -g.to_samples(_derivative(chi), grid) + w * bpsi + st.seed_energy * p
            rhs = g.to_samples(psi.replace(psi.wavenumbers ** 2 * psi.amplitudes), grid) + v_out * p
            assert np.sqrt(np.mean(np.abs(lhs - rhs) ** 2)) < 1e-8


def test_isospectral_at_generic_q(steps):
    rng = np.random.default_rng(4)
    qs = rng.uniform(0.02, 0.48, 32) * rng.choice([-1, 1], 32)
    for st in steps:
        for q in qs:
            e_in = b.block_eigenvalues(b.bloch_matrix(st.input_potential, q))[:7]
            e_out = b.block_eigenvalues(b.bloch_matrix(st.output_potential, q))[:7]
            assert np.allclose(e_in, e_out, atol=1e-8)


def test_map_state_plane_wave(steps):
    first = steps[0]
    psi = g.Wavefield.from_modes({2: 1.0}, A)       # exp(2ix), E = 4
    xi = s.susy_map_state(psi, first.superpotential_series)
    assert s.eigen_residual(xi, first.output_potential, 4.0) < 1e-8


def test_map_state_seed_goes_to_zero(steps):
    first = steps[0]
    # cos(x/2 + i) on the doubled period with tilt 1/2
    phi = g.Wavefield(A, np.array([np.exp(1.0) / 2, np.exp(-1.0) / 2]), -1, Fraction(1, 2))
    xi = s.susy_map_state(phi, first.superpotential_series)
    assert np.sqrt(xi.power) < 1e-10


def test_map_state_gives_second_seed(steps):
    first = steps[0]
    # cos(3x/2 + 3i) = (e^{-3} e^{3ix/2} + e^{3} e^{-3ix/2}) / 2
    psi = g.Wavefield(A, np.array([np.exp(3.0) / 2, 0, 0, np.exp(-3.0) / 2]), -2, Fraction(1, 2))
    xi = s.susy_map_state(psi, first.superpotential_series)
    grid = g.Grid(A, 512)
    ref = s.second_seed(A, 1.0)(grid.x)
    got = g.to_samples(xi, grid)
    c = np.vdot(ref, got) / np.vdot(ref, ref)
    assert np.max(np.abs(got - c * ref)) < 1e-8 * np.max(np.abs(got))


def test_jordan_chain_one_ss():
    pot = g.one_singularity()
    ch = s.jordan_chain(pot, 0.25, -0.5)
    assert max(ch.residuals) < 1e-8
    assert ch.norm_u == pytest.approx(1.0, abs=1e-12)
    assert abs(np.vdot(ch.u.amplitudes, ch.v.amplitudes)) < 1e-10
    grid = g.Grid(A, 512)
    u = g.to_samples(ch.u, grid)
    ref = 1 / np.cos(grid.x / 2 + 1j)
    c = np.vdot(ref, u) / np.vdot(ref, ref)
    assert np.max(np.abs(u - c * ref)) < 1e-8 * np.max(np.abs(u))


def test_jordan_chain_rejects_diabolic():
    with pytest.raises(NotDefective):
        s.jordan_chain(g.one_singularity(), 1.0, 0.0)
    with pytest.raises(NotDefective):
        s.jordan_chain(g.free_space(), 1.0, 0.0)
    with pytest.raises(NotDefective):
        s.jordan_chain(g.one_singularity(), 0.3, 0.0)


def test_inverse_seed_in_partner_kernel(steps):
    first = steps[0]
    inv = s.SeedSolution(lambda x: 1 / np.cos(x / 2 + 1j), 0.25, 2 * A)
    grid = g.Grid(2 * A, 1024)
    f = inv(grid.x)
    res = (-g.spectral_derivative(f, 2 * A, 2) + g.potential_samples(first.output_potential, grid) * f
           - 0.25 * f)
    assert np.max(np.abs(res)) / np.max(np.abs(f)) < 1e-8
