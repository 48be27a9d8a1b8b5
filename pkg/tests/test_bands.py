import numpy as np
import pytest
import scipy.linalg as sla

from pttalbot import bands as b
from pttalbot import grid as g
from pttalbot.errors import TruncationTooSmall

A = 2 * np.pi


def test_free_particle_block():
    m = b.bloch_matrix(g.free_space(A), 0.1, 1).matrix
    assert np.allclose(np.diag(m), [0.81, 0.01, 1.21], atol=1e-15)
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0


def test_exp_block_has_unit_subdiagonal():
    m = b.bloch_matrix(g.exp_potential(1.0), 0.2, 4).matrix
    assert np.allclose(np.diag(m, -1), 1.0)
    off = m - np.diag(np.diag(m)) - np.diag(np.diag(m, -1), -1)
    assert not off.any()


def test_one_ss_block_is_lower_triangular():
    pot = g.one_singularity()
    blk = b.bloch_matrix(pot, -0.3)
    m = blk.matrix
    assert not np.triu(m, 1).any()
    assert np.diag(m, -1)[0] == pytest.approx(0.270671, abs=1e-6)
    assert np.array_equal(np.diag(m).real, blk.diagonal_kinetic)


def test_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        b.bloch_matrix(g.one_singularity(), 0.0, 10)


@pytest.mark.parametrize("n_trunc", [96, 128])
def test_triangular_eigenvalues_independent_of_truncation(n_trunc):
    pot = g.two_singularity()
    blk = b.bloch_matrix(pot, 0.37 / 2, n_trunc)
    ev = np.sort(b.block_eigenvalues(blk).real)[:7]
    assert np.allclose(ev, np.sort(blk.diagonal_kinetic)[:7], atol=1e-12)


def test_folding_sequence():
    assert list(b.folding_sequence(5)) == [0, 1, -1, 2, -2]


@pytest.mark.parametrize("pot", [g.free_space(), g.one_singularity(), g.two_singularity(),
                                 g.exp_potential(1.0)])
def test_gapless_bands(pot):
    d = b.band_diagram(pot, 64, 6)
    assert d.parabola_deviation().max() < 1e-8


def test_mathieu_opens_gaps():
    d = b.band_diagram(g.mathieu(2.0), 64, 6)
    assert not d.is_gapless()


def test_band_symmetry():
    pot = g.one_singularity()
    qs = np.linspace(0.05, 0.45, 9)
    for q in qs:
        ep = b.block_eigenvalues(b.bloch_matrix(pot, q))[:7]
        em = b.block_eigenvalues(b.bloch_matrix(pot, -q))[:7]
        assert np.allclose(ep, em, atol=1e-8)


def test_mathieu_gap_perturbative():
    v0 = 0.2
    ev = b.block_eigenvalues(b.bloch_matrix(g.mathieu(v0), -0.5)).real
    gap = ev[1] - ev[0]
    assert abs(gap - v0) < 0.1 * v0


def test_threads_do_not_change_bands(monkeypatch):
    pot = g.two_singularity()
    one = b.band_diagram(pot, 32, 6, threads=1).energies
    four = b.band_diagram(pot, 32, 6, threads=4).energies
    assert np.array_equal(one, four)


@pytest.mark.parametrize("make, expected", [
    (lambda: g.one_singularity(), [1]),
    (lambda: g.two_singularity(), [1, 3]),
    (lambda: g.exp_potential(1.0), [1, 2, 3, 4, 5, 6]),
    (lambda: g.free_space(), []),
])
def test_singularity_census(make, expected):
    rep = b.detect_singularities(make(), 6)
    assert rep.defective_levels == expected


@pytest.mark.parametrize("make", [g.one_singularity, g.two_singularity, lambda: g.exp_potential(1.0)])
def test_census_stable_under_doubled_truncation(make):
    pot = make()
    n0 = b.default_truncation(pot)
    r1 = b.detect_singularities(pot, 6, n0)
    r2 = b.detect_singularities(pot, 6, 2 * n0)
    assert r1.defective_levels == r2.defective_levels


def test_records_locations_and_angles():
    rep = b.detect_singularities(g.two_singularity(), 6)
    for r in rep.records:
        assert r.q_loc == (0.0 if r.n % 2 == 0 else -np.pi / A)
        assert r.energy == pytest.approx((r.n / 2) ** 2)
        if r.defective:
            assert r.angle < 1e-6


def test_kernel_dimension_of_jordan_block():
    j = np.array([[1.0, 1.0], [0.0, 1.0]]) - np.eye(2)
    assert b.kernel_dimension(j)[0] == 1
    assert b.kernel_dimension(np.diag([1.0, 2.0, 0.0, 0.0]))[0] == 2


def test_kernel_dimension_matches_scipy_rank():
    pot = g.one_singularity()
    m = b.bloch_matrix(pot, 0.0).matrix - 1.0 * np.eye(2 * b.default_truncation(pot) + 1)
    dim, _ = b.kernel_dimension(m)
    assert dim == m.shape[0] - np.linalg.matrix_rank(b.equilibrated(m), tol=1e-8 * sla.norm(b.equilibrated(m), 2))


def test_revival_applicability():
    rep1 = b.detect_singularities(g.one_singularity(), 6)
    assert b.theorem1_applicable(rep1, 3).ok
    blocked = b.theorem1_applicable(rep1, 2)
    assert not blocked.ok and blocked.blocking.n == 1 and blocked.blocking.q_loc == -0.5
    free = b.detect_singularities(g.free_space(), 6)
    assert all(b.theorem1_applicable(free, n).ok for n in (1, 2, 3, 4))
    exp_rep = b.detect_singularities(g.exp_potential(1.0), 6)
    assert not b.theorem1_applicable(exp_rep, 3).ok


def test_csv_outputs(tmp_path):
    pot = g.one_singularity()
    b.write_bands_csv(b.band_diagram(pot, 8, 2), tmp_path / "bands.csv")
    b.write_singularities_csv(b.detect_singularities(pot, 3), tmp_path / "sing.csv")
    lines = (tmp_path / "bands.csv").read_text().splitlines()
    assert lines[0] == "q,alpha,re_E,im_E,beta"
    assert len(lines) == 1 + 8 * 3
    assert (tmp_path / "sing.csv").read_text().splitlines()[1].split(",")[3] == "true"
