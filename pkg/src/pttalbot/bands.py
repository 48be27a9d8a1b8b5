"""Bloch matrices, band diagrams and the spectral-singularity census.

For Bloch wave number ``q`` the field ``sum_j f_j exp(i (q + 2 pi j / a) x)``
evolves under

    H_{j,l}(q) = (q + 2 pi j / a)^2 delta_{jl} + V_{j-l},   |j|, |l| <= n_trunc.

A potential with only positive harmonics makes ``H`` lower triangular, so its
eigenvalues are the free-particle parabola folded into the zone. Degeneracies
of the parabola sit at ``E_n = (n pi / a)^2``; whether one of them is a
spectral singularity is decided by the rank of ``H(q) - E_n``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import ComplexSpectrum, TruncationTooSmall
from .grid import TWO_PI, ComplexPotential
from .io import write_csv

RANK_TOL = 1e-8
DEGENERACY_WINDOW = 1e-6
IMAG_TOL = 1e-8


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TALBOT_THREADS", "1")))
    except ValueError:
        return 1


def default_truncation(pot: ComplexPotential) -> int:
    return max(2 * pot.n_max, 16)


@dataclass(frozen=True, eq=False)
class BlochBlock:
    q: float
    n_trunc: int
    matrix: np.ndarray
    period: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n_trunc, self.n_trunc + 1)

    @property
    def diagonal_kinetic(self) -> np.ndarray:
        return (self.q + TWO_PI * self.indices / self.period) ** 2


def bloch_matrix(pot: ComplexPotential, q: float, n_trunc: int | None = None,
                 check_zone: bool = True) -> BlochBlock:
    """Truncated Bloch Hamiltonian at wave number ``q``."""
    a = pot.period
    if n_trunc is None:
        n_trunc = default_truncation(pot)
    if n_trunc < 2 * pot.n_max:
        raise TruncationTooSmall(f"n_trunc={n_trunc} < 2*n_max={2 * pot.n_max}")
    if check_zone and abs(q) > np.pi / a * (1 + 1e-12):
        raise ValueError(f"q={q} outside the first Brillouin zone")
    j = np.arange(-n_trunc, n_trunc + 1)
    diff = j[:, None] - j[None, :]
    V = np.where(np.abs(diff) <= pot.n_max,
                 pot.coeffs[np.clip(diff + pot.n_max, 0, 2 * pot.n_max)], 0.0)
    H = V.astype(complex)
    H[np.diag_indices_from(H)] = (q + TWO_PI * j / a) ** 2 + pot.coeff(0)
    H.setflags(write=False)
    return BlochBlock(float(q), int(n_trunc), H, a)


def folding_sequence(count: int) -> np.ndarray:
    """Folding indices 0, 1, -1, 2, -2, ... for bands 0..count-1."""
    return np.array([(alpha + 1) // 2 * (1 if alpha % 2 else -1) for alpha in range(count)])


def folded_parabola(q, beta, a: float):
    """Free-particle bands folded into the zone, ``(2 pi beta / a - |q|)^2``."""
    return (TWO_PI * np.asarray(beta) / a - np.abs(np.asarray(q))[..., None]) ** 2


def _is_hermitian(m: np.ndarray) -> bool:
    return bool(np.allclose(m, m.conj().T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())))


def block_eigenvalues(block: BlochBlock) -> np.ndarray:
    """Eigenvalues sorted by real part."""
    m = block.matrix
    if _is_hermitian(m):
        ev = sla.eigvalsh(m).astype(complex)
    else:
        ev = sla.eigvals(m)
    return ev[np.argsort(ev.real, kind="stable")]


@dataclass(frozen=True, eq=False)
class BandDiagram:
    q: np.ndarray
    energies: np.ndarray  # (len(q), alpha_max + 1), complex
    beta: np.ndarray
    period: float

    @property
    def parabola(self) -> np.ndarray:
        return folded_parabola(self.q, self.beta, self.period)

    def parabola_deviation(self) -> np.ndarray:
        """``|E_alpha(q) - (2 pi beta_alpha / a - |q|)^2|`` per q and band."""
        return np.abs(self.energies - self.parabola)

    def is_gapless(self, tol: float = 1e-8) -> bool:
        return bool(self.parabola_deviation().max() < tol)

    def rows(self):
        for iq, q in enumerate(self.q):
            for alpha, beta in enumerate(self.beta):
                e = self.energies[iq, alpha]
                yield q, alpha, e.real, e.imag, int(beta)


def brillouin_grid(a: float, count: int) -> np.ndarray:
    """``count`` uniform points on ``[-pi/a, pi/a)``."""
    return -np.pi / a + TWO_PI / a * np.arange(count) / count


def band_diagram(pot: ComplexPotential, q_count: int = 64, alpha_max: int = 6,
                 n_trunc: int | None = None, threads: int | None = None) -> BandDiagram:
    """Lowest ``alpha_max + 1`` bands on a uniform zone grid.

    Raises ComplexSpectrum when a reported band has ``|Im E| > 1e-8``.
    """
    qs = brillouin_grid(pot.period, q_count)

    def one(q):
        ev = block_eigenvalues(bloch_matrix(pot, q, n_trunc))
        return ev[: alpha_max + 1]

    workers = threads or _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(one, qs))
    else:
        rows = [one(q) for q in qs]
    energies = np.array(rows)
    worst = np.abs(energies.imag).max()
    if worst > IMAG_TOL:
        raise ComplexSpectrum(f"max |Im E| = {worst:.3e}: broken PT phase")
    return BandDiagram(qs, energies, folding_sequence(alpha_max + 1), pot.period)


# -- defectiveness -----------------------------------------------------------

def equilibrated(m: np.ndarray) -> np.ndarray:
    """``S m S`` with ``S = diag(1/sqrt(max(1, |m_jj|)))``.

    Congruence by an invertible diagonal keeps the rank but stops the large
    kinetic entries of distant modes from setting the singular-value scale.
    """
    s = 1.0 / np.sqrt(np.maximum(1.0, np.abs(np.diag(m))))
    return s[:, None] * m * s[None, :]


def kernel_dimension(m: np.ndarray, rel_tol: float = RANK_TOL) -> tuple[int, np.ndarray]:
    """Count singular values below ``rel_tol * sigma_max`` of the equilibrated matrix."""
    sv = sla.svdvals(equilibrated(m))
    return int(np.sum(sv < rel_tol * sv[0])), sv


def principal_angle(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    c = np.vdot(u, v)
    perp = np.linalg.norm(v - c * u)
    return float(np.arctan2(perp, abs(c)))


@dataclass(frozen=True)
class SingularityRecord:
    n: int
    energy: float
    q_loc: float
    defective: bool
    angle: float
    kernel_dim: int
    degenerate: bool = True


@dataclass(frozen=True)
class SingularityReport:
    period: float
    records: tuple[SingularityRecord, ...] = field(default_factory=tuple)

    @property
    def defective_levels(self) -> list[int]:
        return [r.n for r in self.records if r.defective]

    @property
    def n_energy_max(self) -> int:
        return max((r.n for r in self.records), default=0)

    def rows(self):
        for r in self.records:
            yield r.n, r.energy, r.q_loc, r.defective, r.angle


def singularity_location(n: int, a: float) -> float:
    """``q = 0`` for even ``n``, ``q = -pi/a`` for odd ``n``."""
    return 0.0 if n % 2 == 0 else -np.pi / a


def classify_level(pot: ComplexPotential, n: int, n_trunc: int | None = None) -> SingularityRecord:
    a = pot.period
    q = singularity_location(n, a)
    energy = (n * np.pi / a) ** 2
    block = bloch_matrix(pot, q, n_trunc)
    m = block.matrix
    dim, _ = kernel_dimension(m - energy * np.eye(len(m)))
    ev, vecs = sla.eig(m)
    near = np.argsort(np.abs(ev - energy))[:2]
    degenerate = bool(np.all(np.abs(ev[near] - energy) < DEGENERACY_WINDOW))
    angle = principal_angle(vecs[:, near[0]], vecs[:, near[1]]) if degenerate else float("nan")
    return SingularityRecord(n, energy, q, degenerate and dim == 1, angle, dim, degenerate)


def detect_singularities(pot: ComplexPotential, n_energy_max: int = 6,
                         n_trunc: int | None = None) -> SingularityReport:
    """Classify each parabola crossing ``E_n``, ``n = 1..n_energy_max``.

    Kernel dimension 1 of ``H(q_loc) - E_n`` marks a defective (Jordan) pair;
    dimension 2 a diabolic crossing.
    """
    recs = tuple(classify_level(pot, n, n_trunc) for n in range(1, n_energy_max + 1))
    return SingularityReport(pot.period, recs)


class Applicability(NamedTuple):
    ok: bool
    reason: str
    blocking: SingularityRecord | None = None


def theorem1_applicable(report: SingularityReport, N: int) -> Applicability:
    """Revival guarantee for commensurate period ``(N/M) a``.

    Odd ``N`` only samples ``q = 0`` among the degenerate wave numbers, so only
    even-``n`` singularities matter; even ``N`` also samples the zone edge.
    """
    for r in report.records:
        if not r.defective:
            continue
        if N % 2 == 0 or r.q_loc == 0.0:
            where = "q=0" if r.q_loc == 0.0 else "q=-pi/a"
            return Applicability(False, f"spectral singularity E_{r.n}={r.energy:.6g} at {where}", r)
    if N % 2:
        return Applicability(True, "N odd and no singularity at q=0")
    return Applicability(True, "no spectral singularities")


def write_bands_csv(diagram: BandDiagram, path):
    return write_csv(path, ["q", "alpha", "re_E", "im_E", "beta"], diagram.rows())


def write_singularities_csv(report: SingularityReport, path):
    return write_csv(path, ["n", "E", "q_loc", "defective", "angle"], report.rows())
